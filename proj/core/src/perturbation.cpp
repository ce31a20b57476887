#include "qacoustic/perturbation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "qacoustic/error.hpp"
#include "qacoustic/quadrature.hpp"
#include "qacoustic/units.hpp"

namespace qacoustic {
namespace {

// f(eps) drops below 1e-12 at eps - mu = ln(1e12) kT.
constexpr double kFermiTail = 27.631021115928547;
constexpr double kLowerWindow = 40.0;

struct Kinematics {
  double mass;    // internal
  double ms;      // m v_s, nm^-1
  double v;       // nm per time unit
  double mu;      // E_F
  double kT;
};

Kinematics kinematics(const MaterialParams& mat, double T_K) {
  const DerivedParams d = derive_parameters(mat);
  Kinematics k;
  k.mass = mass_internal(mat);
  k.v = sound_speed_internal(mat);
  k.ms = k.mass * k.v;
  k.mu = d.E_F;
  k.kT = units::kelvin_to_ev(T_K);
  return k;
}

double k_of_energy(double eps, double mass) { return eps > 0.0 ? std::sqrt(2.0 * mass * eps) : 0.0; }

/// q^2 s / c * int_0^inf du F(c cosh u) / cosh u, F(k) = f(eps)(1 - f(eps + shift)).
double edge_integral(const Kinematics& K, double q, double s, double shift, double rel_tol) {
  const double c = std::abs(s);
  if (c == 0.0) return 0.0;
  const double k_max = k_of_energy(K.mu + kFermiTail * K.kT, K.mass);
  if (c >= k_max) return 0.0;
  auto F = [&](double u) {
    const double ch = std::cosh(u);
    const double k = c * ch;
    const double eps = k * k / (2.0 * K.mass);
    return fermi(eps, K.mu, K.kT) * fermi(-(eps + shift), -K.mu, K.kT) / ch;
  };
  const double w = std::abs(shift);
  std::vector<double> ks = {c,
                            k_of_energy(K.mu - kLowerWindow * K.kT - w, K.mass),
                            k_of_energy(K.mu - w, K.mass),
                            k_of_energy(K.mu, K.mass),
                            k_of_energy(K.mu + w, K.mass),
                            k_max};
  std::vector<double> us;
  for (double k : ks) us.push_back(std::acosh(std::clamp(k, c, k_max) / c));
  std::sort(us.begin(), us.end());
  us.erase(std::unique(us.begin(), us.end()), us.end());
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  opts.abs_tol = 1e-300;
  double total = 0.0;
  for (size_t i = 0; i + 1 < us.size(); ++i) total += integrate(F, us[i], us[i + 1], opts).value;
  return q * q * (s / c) * total;
}

}  // namespace

const char* to_string(RateVariant v) { return v == RateVariant::Full ? "full" : "mean_field"; }

// 1 - f(x; mu) is evaluated as fermi(-x, -mu) so neither branch cancels.
double fermi(double eps, double mu, double kT) {
  if (kT <= 0.0) return eps < mu ? 1.0 : (eps > mu ? 0.0 : 0.5);
  return 1.0 / (1.0 + std::exp((eps - mu) / kT));
}

WavenumberIntegrand rate_integrand(const MaterialParams& mat, double T_K, double q,
                                   double inner_rel_tol) {
  if (!(T_K > 0.0)) throw ConfigurationError("rates need T > 0");
  const Kinematics K = kinematics(mat, T_K);
  const double omega = K.v * q;
  WavenumberIntegrand w;
  w.absorption = edge_integral(K, q, 0.5 * q - K.ms, omega, inner_rel_tol);
  w.emission = edge_integral(K, q, 0.5 * q + K.ms, -omega, inner_rel_tol);
  return w;
}

RateResult relaxation_rate(const MaterialParams& mat, double T_K, RateVariant variant,
                           const RateOptions& opts) {
  if (!(T_K > 0.0)) throw ConfigurationError("rates need T > 0");
  const DerivedParams d = derive_parameters(mat);
  const Kinematics K = kinematics(mat, T_K);
  const double spont = variant == RateVariant::Full ? 1.0 : 0.0;
  auto integrand = [&](double q) {
    if (q <= 0.0) return 0.0;
    const double n = bose_occupation(K.v * q, K.kT);
    const WavenumberIntegrand w = rate_integrand(mat, T_K, q, opts.inner_rel_tol);
    return n * w.absorption + (n + spont) * w.emission;
  };
  QuadratureOptions qo;
  qo.rel_tol = opts.rel_tol;
  qo.abs_tol = 1e-300;
  qo.max_intervals = opts.max_intervals;
  // The absorption edge closes at q = 2 m v_s, where its sign flips.
  std::vector<double> cuts = {0.0};
  if (2.0 * K.ms < d.q_D) cuts.push_back(2.0 * K.ms);
  cuts.push_back(d.q_D);
  double value = 0.0, error = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const QuadratureResult r = integrate(integrand, cuts[i], cuts[i + 1], qo);
    value += r.value;
    error += r.error;
  }
  const double prefactor =
      mat.E_d * mat.E_d * coupling_volume(mat) / (2.0 * units::kPi * K.kT);
  RateResult res;
  res.variant = variant;
  res.T_K = T_K;
  res.inv_tau_per_fs = units::per_internal_to_per_fs(prefactor * value);
  res.error_estimate_per_fs = units::per_internal_to_per_fs(prefactor * error);
  return res;
}

RateResult rate_full(const MaterialParams& mat, double T_K, const RateOptions& opts) {
  return relaxation_rate(mat, T_K, RateVariant::Full, opts);
}

RateResult rate_meanfield(const MaterialParams& mat, double T_K, const RateOptions& opts) {
  return relaxation_rate(mat, T_K, RateVariant::MeanField, opts);
}

RateSweep rate_sweep(const MaterialParams& mat, const std::vector<double>& T_list,
                     const RateOptions& opts, unsigned max_parallel) {
  for (double T : T_list)
    if (!(T > 0.0)) throw ConfigurationError("rate sweep temperatures must be positive");
  RateSweep sweep;
  sweep.rows.resize(T_list.size());
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (size_t i = next++; i < T_list.size(); i = next++) {
      try {
        const RateResult full = rate_full(mat, T_list[i], opts);
        const RateResult mf = rate_meanfield(mat, T_list[i], opts);
        RateRow& row = sweep.rows[i];
        row.T_K = T_list[i];
        row.inv_tau_full_per_fs = full.inv_tau_per_fs;
        row.inv_tau_mf_per_fs = mf.inv_tau_per_fs;
        row.R = full.inv_tau_per_fs > 0.0 ? mf.inv_tau_per_fs / full.inv_tau_per_fs : 0.0;
        row.err_est_per_fs = std::max(full.error_estimate_per_fs, mf.error_estimate_per_fs);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads =
      std::clamp<unsigned>(max_parallel, 1, std::max<size_t>(T_list.size(), 1));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<size_t> order(T_list.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return T_list[a] < T_list[b]; });
  for (size_t i = 0; i < order.size(); ++i) {
    const RateRow& r = sweep.rows[order[i]];
    if (r.inv_tau_full_per_fs < r.inv_tau_mf_per_fs) sweep.full_at_least_mf = false;
    if (i > 0) {
      const RateRow& p = sweep.rows[order[i - 1]];
      if (!(r.inv_tau_full_per_fs > p.inv_tau_full_per_fs)) sweep.full_increasing = false;
      if (i > order.size() / 2 && !(r.R > p.R)) sweep.R_increasing_high_half = false;
    }
  }
  return sweep;
}

}  // namespace qacoustic
