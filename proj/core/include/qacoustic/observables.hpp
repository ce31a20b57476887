#pragma once

#include <complex>
#include <string>
#include <vector>

#include "qacoustic/grid.hpp"
#include "qacoustic/vec2.hpp"
#include "qacoustic/wavepacket.hpp"

namespace qacoustic {

class Fft2D;
using cplx = std::complex<double>;

// Bilinear expectations <psi_minus| O |psi_plus>, never divided by the overlap.

cplx overlap(const WavepacketPair& pair, const Grid2D& grid);

struct MomentumExpectation {
  cplx px;  ///< hbar k_x, nm^-1
  cplx py;
};
MomentumExpectation momentum_expect(const WavepacketPair& pair, const Grid2D& grid,
                                    const Fft2D& fft);

/// <psi_minus| m(k) |psi_plus> for a multiplier diagonal in k, stored like a field.
cplx fourier_expect(const WavepacketPair& pair, const Grid2D& grid, const Fft2D& fft,
                    const std::vector<double>& multiplier);

/// Moments of d = r - frame folded into [-L/2, L/2) per axis.
struct PositionMoments {
  cplx x;
  cplx y;
  cplx r2;
};
PositionMoments position_moments(const WavepacketPair& pair, const Grid2D& grid, Vec2 frame);

/// Circular mean of |psi_plus|^2 + |psi_minus|^2, placed on the periodic
/// image nearest `previous`. Only picks a frame; it carries no bilinear weight.
Vec2 track_center(const WavepacketPair& pair, const Grid2D& grid, Vec2 previous);

/// Recorded bilinear expectations. Position moments are taken about `frame`,
/// a per-sample real reference point. For an ensemble the frame is the mean
/// of the per-realization frames and every moment is shifted onto it exactly.
struct ObservableSeries {
  std::vector<double> t_fs;
  std::vector<cplx> px;
  std::vector<cplx> x;
  std::vector<cplx> y;
  std::vector<cplx> r2;
  std::vector<cplx> overlap;
  std::vector<Vec2> frame;
  std::vector<double> stderr_px;  ///< ensemble standard error of Re px; 0 for one run
  /// [record][mode] Re <g_q>; only filled with Ehrenfest feedback.
  std::vector<std::vector<Vec2>> g_expect;

  size_t n_realizations = 1;
  size_t n_divergent = 0;
  bool divergent = false;
  size_t size() const { return t_fs.size(); }
};

/// Average of the non-divergent members in index order. Throws
/// EnsembleFailureError when all diverged.
ObservableSeries ensemble_average(const std::vector<ObservableSeries>& runs);

struct RelaxationFit {
  bool ok = false;
  double tau_fs = 0.0;        ///< +inf when the fit fails
  double inv_tau_per_fs = 0.0;  ///< -slope; meaningful even when not ok
  double t_begin_fs = 0.0;
  double t_end_fs = 0.0;
  size_t points = 0;
  double r_squared = 0.0;
  std::string method = "log-linear least squares";
  std::string diagnostic;
};

struct FitWindow {
  double t_begin_fs = 0.0;
  double t_end_fs = -1.0;  ///< < 0: until Re px falls to 0.2 of its start or turns non-positive
};

/// Fits ln Re<p_x> against t. Never throws on bad data; see RelaxationFit::ok.
RelaxationFit fit_relaxation(const ObservableSeries& series, FitWindow window = {});

struct SpreadResult {
  double xi_nm = 0.0;
  size_t clamped_points = 0;  ///< negative variances reset to zero
};

/// sqrt of the time average over [0, T] of Re<r^2> - Re<x>^2 - Re<y>^2 by the
/// trapezoid rule. Throws ConfigurationError when the series ends before T.
SpreadResult spread_xi(const ObservableSeries& series, double T_window_fs = 40.0);

}  // namespace qacoustic
