#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qacoustic/bath.hpp"

namespace qacoustic {

using cplx = std::complex<double>;

/// Row-major 2x2 real matrix.
struct Mat2 {
  double m00 = 0, m01 = 0, m10 = 0, m11 = 0;
};
Mat2 operator*(const Mat2& a, const Mat2& b);

struct KernelValue {
  Mat2 L;  ///< [[cos, -sin], [sin, cos]](omega lag)
  Mat2 M;  ///< diag(sin, -sin)(omega lag)
};

KernelValue kernel_eval(double omega, double lag);

/// 4x4 block over the components (eta0, eta1, nu0, nu1), row-major.
using Block4 = std::array<cplx, 16>;
inline cplx& at(Block4& b, int r, int c) { return b[r * 4 + c]; }
inline const cplx& at(const Block4& b, int r, int c) { return b[r * 4 + c]; }

/// Heaviside step with Theta(0) = 1/2.
double heaviside(double x);

/// C(lag) with C_ab(lag) = <z_a(t) z_b(t + lag)>, no conjugation:
///   eta-eta  L(lag) / 2
///   eta-nu   i M(lag) Theta(-lag)
///   nu-eta  -i M(lag) Theta(lag)
///   nu-nu    0
/// It satisfies C(-lag) = C(lag)^T.
Block4 covariance_block(double omega, double lag);

/// Lags j dt for j = -(n_steps - 1) .. n_steps - 1.
class CovSequence {
 public:
  CovSequence(double omega, double dt, int n_steps);
  int n_steps() const { return n_; }
  double dt() const { return dt_; }
  double omega() const { return omega_; }
  const Block4& at(int j) const { return blocks_[static_cast<size_t>(j + n_ - 1)]; }

 private:
  double omega_, dt_;
  int n_;
  std::vector<Block4> blocks_;
};

CovSequence build_cov_sequence(double omega, double dt, int n_steps);

/// Circular embedding length: twice the next power of two >= n_steps.
int padded_length(int n_steps);

/// Per-bin filter H_k with H_{-k} H_k^T = G_k, G the DFT of the circularly
/// embedded covariance. Mixing real white noise through H reproduces the
/// covariance exactly at every lag shorter than the trajectory.
struct NoiseFilter {
  double omega = 0.0;
  int P = 0;
  std::vector<Block4> H;
  double residual = 0.0;  ///< max reconstruction error relative to max |G|
};

/// Factor a spectral covariance. Off the self-paired bins this is a balanced
/// SVD split (the smallest-variance choice); bins 0 and P/2 must be complex
/// symmetric and use a Takagi factorization. Throws FactorizationError when
/// the spectrum violates G_{-k} = G_k^T or reconstruction misses `tol`.
NoiseFilter factorize_spectrum(const std::vector<Block4>& G, double tol = 1e-8);

/// DFT of the circular embedding of build_cov_sequence(omega, dt, n_steps).
std::vector<Block4> spectral_covariance(double omega, double dt, int n_steps);

NoiseFilter make_noise_filter(double omega, double dt, int n_steps);

/// Per-mode eta and nu samples on t_j = j dt, layout [step][mode][eta0, eta1, nu0, nu1].
class NoiseTrajectory {
 public:
  NoiseTrajectory() = default;
  NoiseTrajectory(size_t n_modes, int n_steps, double dt, std::uint64_t seed);

  size_t n_modes() const { return n_modes_; }
  int n_steps() const { return n_steps_; }
  double dt() const { return dt_; }
  std::uint64_t seed() const { return seed_; }

  cplx* step(int j) { return data_.data() + static_cast<size_t>(j) * n_modes_ * 4; }
  const cplx* step(int j) const { return data_.data() + static_cast<size_t>(j) * n_modes_ * 4; }
  cplx& value(int j, size_t mode, int comp) { return step(j)[mode * 4 + comp]; }
  cplx value(int j, size_t mode, int comp) const { return step(j)[mode * 4 + comp]; }

  const std::vector<cplx>& raw() const { return data_; }
  std::vector<cplx>& raw() { return data_; }

 private:
  size_t n_modes_ = 0;
  int n_steps_ = 0;
  double dt_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<cplx> data_;
};

/// Generates trajectories for a fixed (mode set, dt, n_steps). Filters are
/// built once per distinct frequency and shared; generate() is const and
/// thread-safe. Mode i draws from stream derive_seed(seed, i).
class NoiseGenerator {
 public:
  NoiseGenerator(const ModeSet& modes, double dt, int n_steps);
  /// Single-frequency generator, mainly for validation.
  NoiseGenerator(double omega, double dt, int n_steps);

  NoiseTrajectory generate(std::uint64_t seed) const;
  size_t n_modes() const { return mode_filter_.size(); }
  int n_steps() const { return n_steps_; }
  int padded() const { return P_; }
  double dt() const { return dt_; }
  size_t filter_count() const { return filters_.size(); }
  size_t filter_bytes() const;

 private:
  void build(const std::vector<double>& omegas);
  double dt_;
  int n_steps_;
  int P_;
  std::vector<std::shared_ptr<const NoiseFilter>> filters_;
  std::vector<const NoiseFilter*> mode_filter_;
};

NoiseTrajectory generate(const ModeSet& modes, double dt, int n_steps, std::uint64_t seed);

/// Streaming estimator of <z_a(s) z_b(s + lag)> for one mode, averaged over
/// start times s and over realizations, compared with covariance_block.
class CovarianceValidator {
 public:
  CovarianceValidator(double omega, double dt, int max_lag, size_t mode = 0);
  void add(const NoiseTrajectory& traj);
  size_t count() const { return n_; }

  struct LagRow {
    int lag = 0;
    double max_deviation = 0.0;  ///< max_ab |mean - target|
    double error_bar = 0.0;      ///< standard error of the entry attaining it
    double max_z = 0.0;          ///< max_ab |mean - target| / standard error
  };
  struct Report {
    size_t realizations = 0;
    int max_lag = 0;
    double max_deviation = 0.0;
    double error_bar = 0.0;  ///< largest standard error over the window
    double max_z = 0.0;
    bool pass = false;       ///< every entry within 3 standard errors
    std::vector<LagRow> rows;
    /// Empirical means, [lag][16].
    std::vector<Block4> mean;
  };
  Report report(double n_sigma = 3.0) const;

 private:
  double omega_, dt_;
  int max_lag_;
  size_t mode_;
  size_t n_ = 0;
  std::vector<cplx> sum_;      // [lag][16]
  std::vector<double> sum_sq_;  // |x|^2
};

CovarianceValidator::Report validate_statistics(const std::vector<NoiseTrajectory>& trajectories,
                                                double omega, int max_lag, size_t mode = 0);

/// Little-endian dump: u64 mode count, u64 steps, f64 dt, then for each step,
/// each mode, (eta0, eta1, nu0, nu1) as (re, im) f64 pairs.
void write_noise_dump(std::ostream& os, const NoiseTrajectory& traj);
NoiseTrajectory read_noise_dump(std::istream& is);

}  // namespace qacoustic
