#pragma once

#include <complex>
#include <random>
#include <string>
#include <vector>

#include "qacoustic/grid.hpp"
#include "qacoustic/materials.hpp"
#include "qacoustic/vec2.hpp"

namespace qacoustic {

class Fft2D;

using Rng = std::mt19937_64;

/// One lattice mode on the reciprocal grid of the box.
struct Mode {
  int nx = 0;
  int ny = 0;
  Vec2 q;             ///< nm^-1
  double omega = 0;   ///< eV, v_s |q|
  double g_amp = 0;   ///< eV, E_d |q| / sqrt(rho_2D A omega)
};

/// The discretized bath. Immutable once built; shared read-only by workers.
struct ModeSet {
  std::string material;
  double L = 0.0;      ///< nm
  double q_cut = 0.0;  ///< nm^-1
  std::vector<Mode> modes;

  size_t size() const { return modes.size(); }
  double area() const { return L * L; }
};

/// All (2 pi / L)(nx, ny) with 0 < |q| <= q_cut, ordered by ny then nx.
/// Throws EmptyBathError when none fit and ConfigurationError when q_cut > q_D.
ModeSet enumerate_modes(const MaterialParams& mat, double L, double q_cut);

/// g_amp (cos(q.r + pi), sin(q.r)).
Vec2 coupling_vector(const Mode& mode, Vec2 r);

enum class SamplingScheme { RandomPhase, FullGaussian };
const char* to_string(SamplingScheme s);
SamplingScheme sampling_scheme_from_string(const std::string& s);

/// Coherent amplitude alpha per mode. Coordinates X = (x, p) relate by
/// X = -sqrt(2) (Re alpha, Im alpha); the sign absorbs the pi offset of the
/// coupling vector so that X . g_q(r) = sqrt(2) g_amp |alpha| cos(q.r + arg alpha).
/// Free motion is alpha(t) = alpha e^{-i omega t}.
struct CoherentAmplitudes {
  std::vector<std::complex<double>> alpha;
  double T_K = 0.0;
  SamplingScheme scheme = SamplingScheme::RandomPhase;

  Vec2 coordinates(size_t i) const;
  void set_coordinates(size_t i, Vec2 X);
};

/// Thermal coherent amplitudes. RandomPhase fixes |alpha|^2 to the Bose
/// occupation; FullGaussian draws alpha with <|alpha|^2> equal to it.
CoherentAmplitudes sample_thermal(const ModeSet& modes, double T_K, SamplingScheme scheme,
                                  Rng& rng);

/// Throws ConsistencyError unless every mode is a resolvable harmonic of the grid.
void check_on_grid(const ModeSet& modes, const Grid2D& grid);

/// Mean-field potential V(r, t) = sum_q sqrt(2) g_amp |alpha| cos(q.r - omega t + arg alpha)
/// on the grid, via one inverse FFT of the mode coefficients.
std::vector<double> deformation_potential(const ModeSet& modes, const CoherentAmplitudes& amps,
                                          const Grid2D& grid, double t);
std::vector<double> deformation_potential(const ModeSet& modes, const CoherentAmplitudes& amps,
                                          const Grid2D& grid, double t, const Fft2D& fft);

/// Weight of the electron expectation in the Ehrenfest drive; it matches the
/// unit coupling H_I = g . X under which the mean field is X . g.
inline constexpr double kEhrenfestDriveWeight = 1.0;

/// One step of dX/dt = J (omega X + w <g>), J = [[0, 1], [-1, 0]], w the drive
/// weight: exact rotation for the free part and a midpoint rule for the drive.
/// With <g> = 0 this is alpha -> alpha e^{-i omega dt}.
CoherentAmplitudes ehrenfest_step(const ModeSet& modes, const CoherentAmplitudes& amps,
                                  const std::vector<Vec2>& expectation_g, double dt);

std::string to_json(const ModeSet& modes);
ModeSet modeset_from_json(const std::string& text);
std::string to_json(const CoherentAmplitudes& amps);
CoherentAmplitudes amplitudes_from_json(const std::string& text);

}  // namespace qacoustic
