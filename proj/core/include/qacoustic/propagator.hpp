#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "qacoustic/bath.hpp"
#include "qacoustic/fft.hpp"
#include "qacoustic/grid.hpp"
#include "qacoustic/materials.hpp"
#include "qacoustic/noise.hpp"
#include "qacoustic/observables.hpp"
#include "qacoustic/wavepacket.hpp"

namespace qacoustic {

/// psi_plus = psi_minus = exp(-|d|^2 / (4 sigma^2) + i k0 . d), d the
/// minimum-image displacement from `center`, normalized to unit norm.
/// Throws ConfigurationError when sigma < 2 grid spacings or the packet
/// (4 sigma) does not fit in half the box.
WavepacketPair init_gaussian(const Grid2D& grid, Vec2 center, Vec2 k0, double sigma);

struct StepPlan {
  double dt = 0.0;
  long n_steps = 0;
  std::vector<cplx> kinetic_phase;  ///< exp(-i k^2 / (2 m) dt), grid layout
  bool feedback = false;
};

StepPlan make_step_plan(const Grid2D& grid, double mass, double dt, long n_steps,
                        bool feedback = false);

enum class Branch { Plus, Minus };

/// Complex potential of one branch at step j:
///   sum_q (X_q - eta_q + s nu_q / 2) . g_q(r),  s = +1 for Plus, -1 for Minus,
/// with g_q from coupling_vector and X_q the amplitudes rotated by `mf_time`,
/// so the first term is the deformation potential. `noise` may be null (mean field only).
/// For Minus the adjoint (complex conjugate) is returned: that is the operator that
/// propagates the ket of the bra branch.
/// Every term is a single harmonic, so the sum is one inverse FFT.
Field assemble_pseudopotential(const ModeSet& modes, const CoherentAmplitudes& amps,
                               const NoiseTrajectory* noise, long step, double mf_time,
                               const Grid2D& grid, Branch branch, const Fft2D& fft);

/// psi <- e^{-iV dt/2} F^-1 e^{-iK dt} F e^{-iV dt/2} psi for one branch.
void strang_step(Field& psi, const Field& potential, const StepPlan& plan, const Fft2D& fft);
void strang_step(WavepacketPair& pair, const StepPlan& plan, const Fft2D& fft,
                 const Field& potential_plus, const Field& potential_minus);

/// Everything that fixes one realization except its seed. Times are internal.
struct TrajectoryConfig {
  MaterialParams material;
  int N = 64;
  double L = 6.4;            ///< nm
  double q_cut_fraction = 1.0;
  double T_K = 0.0;
  double dt = 0.0;           ///< internal time units
  long n_steps = 0;
  long record_stride = 1;
  SamplingScheme scheme = SamplingScheme::RandomPhase;
  bool noise_enabled = true;
  bool feedback = false;
  double sigma = 0.0;        ///< nm; <= 0 selects 0.02 L
  std::optional<Vec2> center;  ///< default: box center
  std::optional<Vec2> k0;      ///< default: (k_F, 0)
  double divergence_bound = 1e3;
};

double effective_sigma(const TrajectoryConfig& cfg);
Vec2 effective_center(const TrajectoryConfig& cfg);
Vec2 effective_k0(const TrajectoryConfig& cfg);

/// Largest step allowed by dt <= 0.1 min(1 / V_scale, 2 m / k_band^2) with
/// V_scale = rms deformation + 3 * noise rms and k_band = |k0| + q_cut +
/// 3 / (2 sigma), the momentum range the packet can reach in one scattering.
double recommended_dt(const TrajectoryConfig& cfg);

/// Throws ConfigurationError on a violated grid, packet or step-size constraint.
void validate(const TrajectoryConfig& cfg);

/// Shared, immutable state of an ensemble: grid, modes, plan, noise filters.
class TrajectoryRunner {
 public:
  explicit TrajectoryRunner(const TrajectoryConfig& cfg);

  /// One realization; bit-reproducible for a given seed.
  ObservableSeries run(std::uint64_t seed) const;

  const TrajectoryConfig& config() const { return cfg_; }
  const Grid2D& grid() const { return grid_; }
  const ModeSet& modes() const { return modes_; }
  const StepPlan& plan() const { return plan_; }
  const Fft2D& fft() const { return *fft_; }
  const NoiseGenerator* noise_generator() const { return noise_.get(); }

 private:
  TrajectoryConfig cfg_;
  Grid2D grid_;
  ModeSet modes_;
  StepPlan plan_;
  std::unique_ptr<Fft2D> fft_;
  std::unique_ptr<NoiseGenerator> noise_;
};

ObservableSeries run_trajectory(const TrajectoryConfig& cfg, std::uint64_t seed);

struct EnsembleOptions {
  size_t n_realizations = 1;
  std::uint64_t master_seed = 0;
  unsigned max_parallel = 1;
  bool keep_realizations = false;
};

struct EnsembleResult {
  ObservableSeries mean;
  std::vector<std::uint64_t> seeds;  ///< realization r uses derive_seed(master, r)
  std::vector<ObservableSeries> realizations;  ///< only when kept
  size_t n_divergent = 0;
};

EnsembleResult run_ensemble(const TrajectoryRunner& runner, const EnsembleOptions& opts);
EnsembleResult run_ensemble(const TrajectoryConfig& cfg, const EnsembleOptions& opts);

/// Checkpoint: "QACK" magic, u64 N, f64 L, i64 step, then psi_plus and psi_minus
/// as (re, im) f64 pairs in grid order; little-endian.
void write_checkpoint(std::ostream& os, const Grid2D& grid, const WavepacketPair& pair);
WavepacketPair read_checkpoint(std::istream& is, const Grid2D& grid);

}  // namespace qacoustic
