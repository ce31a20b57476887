#pragma once

#include <string>
#include <vector>

#include "qacoustic/materials.hpp"

namespace qacoustic {

enum class RateVariant { Full, MeanField };
const char* to_string(RateVariant v);

struct RateResult {
  double inv_tau_per_fs = 0.0;
  RateVariant variant = RateVariant::Full;
  double T_K = 0.0;
  double error_estimate_per_fs = 0.0;
};

struct RateOptions {
  double rel_tol = 1e-9;       ///< outer (phonon wavenumber) integral
  double inner_rel_tol = 1e-11;
  int max_intervals = 4000;
};

/// Momentum-relaxation rate from first-order deformation-potential scattering
/// with Fermi statistics: absorption weighted by N_q, emission by N_q + 1
/// (Full) or N_q (MeanField). The k integral runs from the kinematic edge
/// |q/2 -+ m v_s| with k = edge cosh(u), which removes the inverse square root.
RateResult rate_full(const MaterialParams& mat, double T_K, const RateOptions& opts = {});
RateResult rate_meanfield(const MaterialParams& mat, double T_K, const RateOptions& opts = {});
RateResult relaxation_rate(const MaterialParams& mat, double T_K, RateVariant variant,
                           const RateOptions& opts = {});

/// k-integrated contribution of one phonon wavenumber q (nm^-1), in internal
/// units before the prefactor beta E_d^2 hbar / (2 pi rho_2D v_s). Signed
/// absorption and emission parts are returned separately.
struct WavenumberIntegrand {
  double absorption = 0.0;  ///< without the occupation N_q
  double emission = 0.0;    ///< without the occupation weight
};
WavenumberIntegrand rate_integrand(const MaterialParams& mat, double T_K, double q,
                                   double inner_rel_tol = 1e-11);

/// Fermi function with chemical potential E_F: 1 / (e^{beta(eps - mu)} + 1).
double fermi(double eps, double mu, double kT);

struct RateRow {
  double T_K = 0.0;
  double inv_tau_full_per_fs = 0.0;
  double inv_tau_mf_per_fs = 0.0;
  double R = 0.0;  ///< mean-field over full
  double err_est_per_fs = 0.0;
};

struct RateSweep {
  std::vector<RateRow> rows;  ///< input order
  bool full_at_least_mf = true;
  bool full_increasing = true;   ///< over rows sorted by T
  bool R_increasing_high_half = true;  ///< over the upper half of sorted T
};

RateSweep rate_sweep(const MaterialParams& mat, const std::vector<double>& T_list,
                     const RateOptions& opts = {}, unsigned max_parallel = 1);

}  // namespace qacoustic
