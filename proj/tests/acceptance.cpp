// Acceptance run: every criterion at its stated size and tolerance, one PASS/FAIL
// line each. Exit status is nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "qacoustic/config.hpp"
#include "qacoustic/experiments.hpp"
#include "qacoustic/perturbation.hpp"
#include "qacoustic/propagator.hpp"
#include "qacoustic/seeding.hpp"
#include "qacoustic/units.hpp"

using namespace qacoustic;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

unsigned g_threads = 1;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunConfig desk() {
  RunConfig c = config_preset("desk");
  c.max_parallel = g_threads;
  return c;
}

double T_D(const MaterialParams& m) { return derive_parameters(m).T_D; }

// 1. Colored-noise covariance for one mode at k_B * 300 K.
Outcome noise_covariance() {
  const auto rep = noise_validation(300.0, 256, 64, 20000, 64, 20240101, false);
  return {rep.pass, fmt("20000 realizations, max |z| = %.3f over lags 0..64 (limit 3), "
                        "max deviation %.2e",
                        rep.max_z, rep.max_deviation)};
}

// 2. Uncoupled packet: analytic width and conserved momentum.
Outcome free_packet() {
  TrajectoryConfig c;
  c.material = material_preset("copper");
  c.material.E_d = 0.0;
  c.N = 128;
  c.L = 12.8;
  c.sigma = 0.4;
  c.T_K = T_D(material_preset("copper"));
  c.dt = recommended_dt(c);
  c.n_steps = 500;
  c.record_stride = 1;
  const ObservableSeries s = run_trajectory(c, 7);
  const double m = mass_internal(c.material);
  const double s2 = c.sigma * c.sigma;
  double worst_var = 0.0, worst_p = 0.0;
  for (size_t j = 0; j < s.size(); ++j) {
    const double t = units::fs_to_internal(s.t_fs[j]);
    const double expect = s2 * (1.0 + std::pow(t / (2.0 * m * s2), 2));
    const double var =
        0.5 * (s.r2[j].real() - s.x[j].real() * s.x[j].real() - s.y[j].real() * s.y[j].real());
    worst_var = std::max(worst_var, std::abs(var / expect - 1.0));
    worst_p = std::max(worst_p, std::abs(s.px[j] - s.px[0]));
  }
  const double t_end = units::fs_to_internal(s.t_fs.back());
  return {worst_var <= 1e-6 && worst_p <= 1e-10,
          fmt("500 steps to %.2f fs (width x%.2f): max rel width error %.2e (limit 1e-6), "
              "max |dp_x| %.2e (limit 1e-10)",
              s.t_fs.back(), std::sqrt(1 + std::pow(t_end / (2 * m * s2), 2)), worst_var,
              worst_p)};
}

// 3. Temporal order of the split step on a frozen deformation field.
Outcome splitting_order() {
  const MaterialParams cu = material_preset("copper");
  const RunConfig cfg = desk();
  const TrajectoryConfig tc = make_trajectory_config(cfg, cu, T_D(cu), false, cfg.window_fs);
  const Grid2D g(tc.N, tc.L);
  const Fft2D fft(tc.N);
  const ModeSet modes = enumerate_modes(cu, tc.L, derive_parameters(cu).q_D);
  Rng rng(31);
  const auto amps = sample_thermal(modes, tc.T_K, SamplingScheme::RandomPhase, rng);
  const auto Vr = deformation_potential(modes, amps, g, 0.0, fft);
  const Field V(Vr.begin(), Vr.end());
  const WavepacketPair start =
      init_gaussian(g, effective_center(tc), effective_k0(tc), effective_sigma(tc));
  const double T = units::fs_to_internal(2.0);
  const double dt0 = T / 25;
  auto px_after = [&](long n) {
    WavepacketPair p = start;
    const StepPlan plan = make_step_plan(g, mass_internal(cu), T / n, n);
    for (long j = 0; j < n; ++j) strang_step(p.plus, V, plan, fft);
    p.minus = p.plus;
    return momentum_expect(p, g, fft).px.real();
  };
  const long n0 = std::lround(T / dt0);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::string errs;
  // Each step size is measured against its own dt / 16 run, so the reference error
  // is the same fixed fraction (1/256) at every point and does not bend the fit.
  for (int h = 0; h < 4; ++h) {
    const long n = n0 << h;
    const double e = std::abs(px_after(n) - px_after(16 * n));
    const double x = std::log(T / n), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    errs += fmt("%s%.2e", h ? ", " : "", e);
  }
  const double p = (4 * sxy - sx * sy) / (4 * sxx - sx * sx);
  return {p >= 1.8 && p <= 2.2,
          fmt("|<p_x>(dt) - <p_x>(dt/16)| at dt0..dt0/8 = %s; fitted order %.3f (range [1.8, 2.2])",
              errs.c_str(), p)};
}

// 4. Sampled deformation-field RMS against the quadrature.
Outcome deformation_rms() {
  const MaterialParams cu = material_preset("copper");
  const double L = auto_box_length(cu, 300);
  const DefpotStats s = defpot_stats(cu, T_D(cu), 64, L, 200, 404);
  const double ratio = s.rms_grid / s.rms_quadrature;
  return {s.n_modes >= 300 && std::abs(ratio - 1.0) <= 0.05,
          fmt("%zu modes, 200 draws: grid %.5f eV vs quadrature %.5f eV, ratio %.4f (within 5%%)",
              s.n_modes, s.rms_grid, s.rms_quadrature, ratio)};
}

// 5. Perturbative inequalities and the high-T approach of the two variants.
Outcome perturbation_trends() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"copper", "bi2212"}) {
    const MaterialParams m = material_preset(name);
    std::vector<double> Ts;
    for (double f : {0.2, 0.5, 1.0, 2.0, 5.0, 10.0}) Ts.push_back(f * T_D(m));
    const RateSweep sw = rate_sweep(m, Ts, {}, g_threads);
    const double R10 = sw.rows.back().R;
    ok = ok && sw.full_at_least_mf && sw.R_increasing_high_half && R10 > 0.9 && R10 <= 1.0;
    detail += fmt("%s%s: full>=mf %s, R high-T increasing %s, R(10 T_D) = %.4f", detail.empty() ? "" : "; ",
                  name, sw.full_at_least_mf ? "yes" : "no", sw.R_increasing_high_half ? "yes" : "no",
                  R10);
  }
  return {ok, detail};
}

// 6. Mean overlap of the two branches stays near one.
Outcome trace_preservation() {
  const MaterialParams cu = material_preset("copper");
  const RunConfig cfg = desk();
  const TrajectoryRunner runner(make_trajectory_config(cfg, cu, T_D(cu), true, cfg.window_fs));
  EnsembleOptions o;
  o.n_realizations = 500;
  o.master_seed = 6;
  o.max_parallel = g_threads;
  const EnsembleResult e = run_ensemble(runner, o);
  double worst = 0.0;
  for (const cplx& v : e.mean.overlap) worst = std::max(worst, std::abs(v - 1.0));
  return {worst < 0.1 && e.n_divergent == 0,
          fmt("500 realizations over %.1f fs: max |<overlap> - 1| = %.4f (limit 0.1), %zu divergent",
              e.mean.t_fs.back(), worst, e.n_divergent)};
}

// 7. Zero-point emission keeps the stochastic rate above the mean-field one at low T.
Outcome lowT_saturation() {
  const MaterialParams cu = material_preset("copper");
  const RunConfig cfg = desk();
  const double T = 0.1 * T_D(cu);
  double st = 0.0, mf = 0.0;
  std::string per_seed;
  for (std::uint64_t seed : {71u, 72u, 73u}) {
    const RelaxPoint p = relax_point(cfg, cu, T, seed, cfg.n_realizations, cfg.window_fs);
    st += p.fit_st.inv_tau_per_fs / 3.0;
    mf += p.fit_mf.inv_tau_per_fs / 3.0;
    per_seed += fmt("%s%.4g/%.4g", per_seed.empty() ? "" : ", ", p.fit_st.inv_tau_per_fs,
                    p.fit_mf.inv_tau_per_fs);
  }
  return {st >= 2.0 * mf && st > 0.0,
          fmt("0.1 T_D, %zu realizations x 3 seeds (st/mf per seed %s fs^-1): mean 1/tau_st = "
              "%.4g, 1/tau_mf = %.4g, ratio %.1f (need >= 2)",
              cfg.n_realizations, per_seed.c_str(), st, mf, mf > 0 ? st / mf : INFINITY)};
}

// 8. Zero-point spreading: stochastic width exceeds mean-field width at 0.2 T_D.
Outcome zero_point_spreading() {
  const RunConfig cfg = desk();
  bool ok = true;
  std::string detail;
  for (const char* name : {"copper", "bi2212"}) {
    const MaterialParams m = material_preset(name);
    const double T = 0.2 * T_D(m);
    EnsembleOptions o;
    o.n_realizations = cfg.spread_realizations;
    o.master_seed = 88;
    o.max_parallel = g_threads;
    double xi[2];
    for (int noise = 1; noise >= 0; --noise) {
      const TrajectoryRunner r(make_trajectory_config(cfg, m, T, noise, cfg.spread_window_fs));
      xi[noise] = spread_xi(run_ensemble(r, o).mean, cfg.spread_window_fs).xi_nm;
    }
    ok = ok && xi[1] > xi[0];
    detail += fmt("%s%s: xi_st %.4f nm vs xi_mf %.4f nm", detail.empty() ? "" : "; ", name,
                  xi[1], xi[0]);
  }
  return {ok, fmt("%s (%zu realizations, %.0f fs window)", detail.c_str(),
                  cfg.spread_realizations, cfg.spread_window_fs)};
}

// 9. Three independent oracles.
Outcome oracle_equivalences() {
  const MaterialParams cu = material_preset("copper");
  // FFT assembly vs direct summation.
  const Grid2D g(64, 6.4);
  const Fft2D fft(64);
  const ModeSet modes = enumerate_modes(cu, 6.4, derive_parameters(cu).q_D);
  Rng rng(9);
  const CoherentAmplitudes amps = sample_thermal(modes, T_D(cu), SamplingScheme::RandomPhase, rng);
  const double dt = 0.01;
  const NoiseTrajectory noise = NoiseGenerator(modes, dt, 16).generate(99);
  const long step = 11;
  CoherentAmplitudes rotated = amps;
  for (size_t i = 0; i < modes.size(); ++i)
    rotated.alpha[i] *= std::polar(1.0, -modes.modes[i].omega * step * dt);
  std::mt19937_64 pick(5);
  std::uniform_int_distribution<size_t> u(0, g.size() - 1);
  double worst_v = 0.0;
  for (Branch b : {Branch::Plus, Branch::Minus}) {
    const Field P = assemble_pseudopotential(modes, amps, &noise, step, step * dt, g, b, fft);
    for (int k = 0; k < 32; ++k) {
      const size_t idx = u(pick);
      const cplx d = oracle::direct_pseudopotential(modes, rotated, noise, step, g.point(idx), b);
      worst_v = std::max(worst_v, std::abs(P[idx] - d) / std::abs(d));
    }
  }
  // Ehrenfest update vs the closed-form driven rotation.
  double worst_e = 0.0;
  {
    std::vector<Vec2> G(modes.size());
    CoherentAmplitudes a = amps;
    std::normal_distribution<double> n(0.0, 0.01);
    for (Vec2& v : G) v = {n(rng), n(rng)};
    const double h = 0.1;
    const int steps = 2000;
    for (int s = 0; s < steps; ++s) a = ehrenfest_step(modes, a, G, h);
    for (size_t i = 0; i < modes.size(); ++i) {
      const Vec2 e = oracle::driven_exact(amps.coordinates(i), kEhrenfestDriveWeight * G[i],
                                          modes.modes[i].omega, h * steps);
      worst_e = std::max(worst_e, norm(a.coordinates(i) - e));
    }
  }
  // Broadened-delta angular integral vs the analytic reduction.
  const double q = 0.5 * derive_parameters(cu).q_D;
  const WavenumberIntegrand w = rate_integrand(cu, T_D(cu), q);
  const double bf_abs = oracle::extrapolated_integrand(cu, T_D(cu), q, true, 2e-3);
  const double bf_em = oracle::extrapolated_integrand(cu, T_D(cu), q, false, 2e-3);
  const double dev = std::max(std::abs(bf_abs / (2 * w.absorption) - 1.0),
                              std::abs(bf_em / (2 * w.emission) - 1.0));
  return {worst_v <= 1e-9 && worst_e <= 1e-6 && dev <= 0.02,
          fmt("pseudopotential max rel %.2e (1e-9); Ehrenfest max %.2e (1e-6); "
              "angular integral max rel %.2e (2%%)",
              worst_v, worst_e, dev)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance criteria");
  std::vector<int> only;
  app.add_option("--only", only, "criterion numbers to run (default: all)");
  app.add_option("--threads", g_threads, "worker threads for ensembles")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "noise covariance reproduction", noise_covariance},
      {2, "free-packet analytics", free_packet},
      {3, "split-operator order", splitting_order},
      {4, "deformation-field RMS", deformation_rms},
      {5, "perturbation-theory inequalities", perturbation_trends},
      {6, "trace preservation on average", trace_preservation},
      {7, "low-T saturation signature", lowT_saturation},
      {8, "zero-point spreading ordering", zero_point_spreading},
      {9, "oracle equivalences", oracle_equivalences},
  };
  const std::set<int> chosen(only.begin(), only.end());
  int failures = 0;
  for (const Criterion& c : all) {
    if (!chosen.empty() && !chosen.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
