#include "qacoustic/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "qacoustic/bath.hpp"
#include "qacoustic/error.hpp"
#include "qacoustic/perturbation.hpp"
#include "qacoustic/seeding.hpp"
#include "qacoustic/units.hpp"

namespace qacoustic {

namespace {

unsigned workers(const RunConfig& cfg) {
  if (cfg.max_parallel > 0) return cfg.max_parallel;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Output {
  std::filesystem::path dir;
  RunManifest manifest;

  Output(const RunConfig& cfg, const std::string& command) : dir(cfg.out_dir) {
    std::filesystem::create_directories(dir);
    manifest.command = command;
    manifest.config_hash = config_hash(cfg);
  }

  void file(const std::string& name, const std::string& content) {
    write_file_atomic((dir / name).string(), content);
    manifest.files.push_back(name);
  }

  void ensemble(const std::string& label, std::uint64_t master, const std::vector<std::uint64_t>& seeds,
                size_t n_div) {
    manifest.ensembles.push_back({label, master, seeds, n_div});
    manifest.n_divergent += n_div;
  }

  void finish(const std::string& stem, const Stopwatch& clock) {
    manifest.wall_time_s = clock.seconds();
    write_file_atomic((dir / (stem + ".manifest.json")).string(), to_json(manifest));
  }
};

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_head(const std::string& hash) { return "# config_hash=" + hash + "\n"; }

}  // namespace

RelaxPoint relax_point(const RunConfig& cfg, const MaterialParams& mat, double T_K,
                       std::uint64_t master_seed, size_t n_realizations, double window_fs) {
  RelaxPoint p;
  p.T_K = T_K;
  EnsembleOptions opts;
  opts.n_realizations = n_realizations;
  opts.master_seed = master_seed;
  opts.max_parallel = workers(cfg);
  {
    const TrajectoryRunner runner(make_trajectory_config(cfg, mat, T_K, true, window_fs));
    EnsembleResult r = run_ensemble(runner, opts);
    p.stochastic = std::move(r.mean);
    p.seeds = std::move(r.seeds);
  }
  {
    const TrajectoryRunner runner(make_trajectory_config(cfg, mat, T_K, false, window_fs));
    p.meanfield = run_ensemble(runner, opts).mean;
  }
  p.fit_st = fit_relaxation(p.stochastic);
  p.fit_mf = fit_relaxation(p.meanfield);
  return p;
}

DefpotStats defpot_stats(const MaterialParams& mat, double T_K, int N, double L, size_t draws,
                         std::uint64_t seed, SamplingScheme scheme) {
  const Grid2D grid(N, L);
  const ModeSet modes = enumerate_modes(mat, L, derive_parameters(mat).q_D);
  const Fft2D fft(N);
  double sum_sq = 0.0;
  for (size_t d = 0; d < draws; ++d) {
    Rng rng(derive_seed(seed, d));
    const CoherentAmplitudes amps = sample_thermal(modes, T_K, scheme, rng);
    for (double v : deformation_potential(modes, amps, grid, 0.0, fft)) sum_sq += v * v;
  }
  DefpotStats s;
  s.T_K = T_K;
  s.rms_grid = std::sqrt(sum_sq / (static_cast<double>(draws) * static_cast<double>(grid.size())));
  s.rms_quadrature = rms_deformation(mat, T_K);
  s.n_modes = modes.size();
  s.draws = draws;
  return s;
}

double lowT_exponent(const MaterialParams& mat, const std::vector<double>& T_K) {
  if (T_K.size() < 2) throw ConfigurationError("exponent fit needs two temperatures");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(T_K.size());
  for (double T : T_K) {
    const double r = rms_deformation(mat, T);
    if (!(r > 0.0)) throw ConfigurationError("exponent fit needs a nonzero field at every T");
    const double x = std::log(T), y = std::log(r * r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

CovarianceValidator::Report noise_validation(double mode_K, int n_steps, int steps_per_period,
                                             size_t realizations, int max_lag,
                                             std::uint64_t master_seed, bool corrupt) {
  const double omega = units::kelvin_to_ev(mode_K);
  const double dt = 2.0 * units::kPi / (omega * steps_per_period);
  const NoiseGenerator gen(corrupt ? 1.25 * omega : omega, dt, n_steps);
  CovarianceValidator val(omega, dt, max_lag);
  for (size_t r = 0; r < realizations; ++r) val.add(gen.generate(derive_seed(master_seed, r)));
  return val.report();
}

void write_series_csv(std::ostream& os, const ObservableSeries& s, const std::string& hash) {
  os << csv_head(hash)
     << "t_fs,px_re,px_im,x_re,y_re,r2_re,overlap_re,overlap_im,stderr_px,xref,yref\n";
  for (size_t j = 0; j < s.size(); ++j) {
    os << num(s.t_fs[j]) << ',' << num(s.px[j].real()) << ',' << num(s.px[j].imag()) << ','
       << num(s.x[j].real()) << ',' << num(s.y[j].real()) << ',' << num(s.r2[j].real()) << ','
       << num(s.overlap[j].real()) << ',' << num(s.overlap[j].imag()) << ','
       << num(s.stderr_px[j]) << ',' << num(s.frame[j].x) << ',' << num(s.frame[j].y) << '\n';
  }
}

std::string to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["tool_version"] = m.tool_version;
  j["status"] = m.status;
  j["n_divergent"] = m.n_divergent;
  j["wall_time_s"] = m.wall_time_s;
  j["files"] = m.files;
  auto& flags = j["flags"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : m.flags) flags[name] = value;
  auto& ens = j["ensembles"] = nlohmann::ordered_json::array();
  for (const auto& e : m.ensembles) {
    ens.push_back({{"label", e.label},
                   {"master_seed", e.master_seed},
                   {"n_divergent", e.n_divergent},
                   {"seeds", e.seeds}});
  }
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

int cmd_relax_sweep(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const Stopwatch clock;
  Output out(cfg, "relax-sweep");
  const std::string hash = out.manifest.config_hash;
  const MaterialParams mat = resolve_material(cfg);
  const double T_D = derive_parameters(mat).T_D;
  const std::vector<double> temps = temperatures_K(cfg, mat, cfg.T_over_TD);

  std::ostringstream table;
  table << csv_head(hash)
        << "T_K,T_over_TD,inv_tau_st_per_fs,inv_tau_mf_per_fs,inv_tau_pt_full_per_fs,"
           "inv_tau_pt_mf_per_fs,R_sim,R_pt,fit_ok_st,fit_ok_mf,r2_st,r2_mf,n_div_st,n_div_mf\n";
  int code = 0;
  for (size_t i = 0; i < temps.size(); ++i) {
    const double T = temps[i];
    try {
      log << "relax-sweep: T = " << T << " K (" << i + 1 << "/" << temps.size() << ")\n";
      const std::uint64_t master = derive_seed(cfg.master_seed, i);
      const RelaxPoint p = relax_point(cfg, mat, T, master, cfg.n_realizations, cfg.window_fs);
      double pt_full = NAN, pt_mf = NAN;
      if (T > 0.0) {
        pt_full = rate_full(mat, T).inv_tau_per_fs;
        pt_mf = rate_meanfield(mat, T).inv_tau_per_fs;
      }
      const std::string stem = "relax_T" + std::to_string(i);
      std::ostringstream st, mf;
      write_series_csv(st, p.stochastic, hash);
      write_series_csv(mf, p.meanfield, hash);
      out.file(stem + "_st.csv", st.str());
      out.file(stem + "_mf.csv", mf.str());
      out.ensemble(stem + "_st", master, p.seeds, p.stochastic.n_divergent);
      out.ensemble(stem + "_mf", master, p.seeds, p.meanfield.n_divergent);
      table << num(T) << ',' << num(T / T_D) << ',' << num(p.fit_st.inv_tau_per_fs) << ','
            << num(p.fit_mf.inv_tau_per_fs) << ',' << num(pt_full) << ',' << num(pt_mf) << ','
            << num(p.fit_mf.inv_tau_per_fs / p.fit_st.inv_tau_per_fs) << ','
            << num(pt_mf / pt_full) << ',' << p.fit_st.ok << ',' << p.fit_mf.ok << ','
            << num(p.fit_st.r_squared) << ',' << num(p.fit_mf.r_squared) << ','
            << p.stochastic.n_divergent << ',' << p.meanfield.n_divergent << '\n';
    } catch (const std::exception& e) {
      // Keep what finished; the marker line flags the table as partial.
      table << "# status=aborted at T_K=" << num(T) << ": " << e.what() << '\n';
      out.manifest.status = std::string("aborted: ") + e.what();
      log << "relax-sweep: aborted: " << e.what() << '\n';
      code = 2;
      break;
    }
  }
  out.file("relax_sweep.csv", table.str());
  out.finish("relax_sweep", clock);
  return code;
}

int cmd_spread_sweep(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const Stopwatch clock;
  Output out(cfg, "spread-sweep");
  const std::string hash = out.manifest.config_hash;
  std::ostringstream table;
  table << csv_head(hash)
        << "material,T_K,T_over_TD,is_T_D,xi_st_nm,xi_mf_nm,clamped_st,clamped_mf,n_div_st,"
           "n_div_mf\n";
  int code = 0;
  size_t point = 0;
  for (const std::string& name : cfg.spread_materials) {
    const MaterialParams mat = resolve_material(cfg, name);
    const double T_D = derive_parameters(mat).T_D;
    const std::vector<double> temps = temperatures_K(cfg, mat, cfg.spread_T_over_TD);
    std::vector<std::pair<double, double>> xi_st_by_T;
    for (const double T : temps) {
      try {
        log << "spread-sweep: " << name << " T = " << T << " K\n";
        const std::uint64_t master = derive_seed(cfg.master_seed, point++);
        const RelaxPoint p =
            relax_point(cfg, mat, T, master, cfg.spread_realizations, cfg.spread_window_fs);
        const SpreadResult st = spread_xi(p.stochastic, cfg.spread_window_fs);
        const SpreadResult mf = spread_xi(p.meanfield, cfg.spread_window_fs);
        const std::string label = "spread_" + name + "_T" + short_num(T / T_D);
        out.ensemble(label + "_st", master, p.seeds, p.stochastic.n_divergent);
        out.ensemble(label + "_mf", master, p.seeds, p.meanfield.n_divergent);
        xi_st_by_T.emplace_back(T, st.xi_nm);
        table << name << ',' << num(T) << ',' << num(T / T_D) << ','
              << (std::abs(T / T_D - 1.0) < 1e-9 ? 1 : 0) << ',' << num(st.xi_nm) << ','
              << num(mf.xi_nm) << ',' << st.clamped_points << ',' << mf.clamped_points << ','
              << p.stochastic.n_divergent << ',' << p.meanfield.n_divergent << '\n';
      } catch (const std::exception& e) {
        table << "# status=aborted at " << name << " T_K=" << num(T) << ": " << e.what() << '\n';
        out.manifest.status = std::string("aborted: ") + e.what();
        log << "spread-sweep: aborted: " << e.what() << '\n';
        code = 2;
        break;
      }
    }
    if (code) break;
    // Trend flag only: stochastic xi should fall with T above T_D.
    std::sort(xi_st_by_T.begin(), xi_st_by_T.end());
    bool falling = true;
    double prev = INFINITY;
    for (const auto& [T, xi] : xi_st_by_T) {
      if (T < T_D) continue;
      falling = falling && xi < prev;
      prev = xi;
    }
    out.manifest.flags.emplace_back(name + "_xi_st_decreasing_above_TD", falling);
  }
  out.file("spread_sweep.csv", table.str());
  out.finish("spread_sweep", clock);
  return code;
}

int cmd_noise_validate(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const Stopwatch clock;
  Output out(cfg, "noise-validate");
  const std::string hash = out.manifest.config_hash;
  log << "noise-validate: " << cfg.noise_realizations << " realizations of " << cfg.noise_steps
      << " steps" << (cfg.noise_corrupt_kernel ? " (corrupted kernel)" : "") << '\n';
  const auto rep = noise_validation(cfg.noise_mode_K, cfg.noise_steps, cfg.noise_steps_per_period,
                                    cfg.noise_realizations, cfg.noise_max_lag, cfg.master_seed,
                                    cfg.noise_corrupt_kernel);
  std::ostringstream csv, txt;
  csv << csv_head(hash) << "lag,max_deviation,error_bar,max_z\n";
  for (const auto& r : rep.rows)
    csv << r.lag << ',' << num(r.max_deviation) << ',' << num(r.error_bar) << ',' << num(r.max_z)
        << '\n';
  txt << "config_hash " << hash << '\n'
      << "realizations " << rep.realizations << '\n'
      << "max_lag " << rep.max_lag << '\n'
      << "max_deviation " << num(rep.max_deviation) << '\n'
      << "largest_error_bar " << num(rep.error_bar) << '\n'
      << "max_z " << num(rep.max_z) << '\n'
      << "result " << (rep.pass ? "PASS" : "FAIL") << "\n\n"
      << "lag  max_deviation  error_bar  max_z\n";
  for (const auto& r : rep.rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%3d  %.6e  %.6e  %.3f\n", r.lag, r.max_deviation,
                  r.error_bar, r.max_z);
    txt << line;
  }
  out.file("noise_validate.csv", csv.str());
  out.file("noise_validate.txt", txt.str());
  out.manifest.flags.emplace_back("pass", rep.pass);
  if (!rep.pass) out.manifest.status = "failed";
  out.finish("noise_validate", clock);
  log << "noise-validate: max z " << rep.max_z << (rep.pass ? " PASS\n" : " FAIL\n");
  return rep.pass ? 0 : 1;
}

int cmd_pt_benchmark(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const Stopwatch clock;
  Output out(cfg, "pt-benchmark");
  const std::string hash = out.manifest.config_hash;
  bool ok = true;
  for (const std::string& name : cfg.pt_materials) {
    const MaterialParams mat = resolve_material(cfg, name);
    const std::vector<double> temps = temperatures_K(cfg, mat, cfg.pt_T_over_TD);
    log << "pt-benchmark: " << name << ", " << temps.size() << " temperatures\n";
    const RateSweep sweep = rate_sweep(mat, temps, RateOptions{}, workers(cfg));
    std::ostringstream csv;
    csv << csv_head(hash) << "T_K,inv_tau_full_per_fs,inv_tau_mf_per_fs,R,err_est\n";
    for (const auto& r : sweep.rows)
      csv << num(r.T_K) << ',' << num(r.inv_tau_full_per_fs) << ',' << num(r.inv_tau_mf_per_fs)
          << ',' << num(r.R) << ',' << num(r.err_est_per_fs) << '\n';
    out.file("pt_" + name + ".csv", csv.str());
    out.manifest.flags.emplace_back(name + "_full_at_least_mf", sweep.full_at_least_mf);
    out.manifest.flags.emplace_back(name + "_R_increasing_high_half", sweep.R_increasing_high_half);
    ok = ok && sweep.full_at_least_mf;
  }
  if (!ok) out.manifest.status = "failed";
  out.finish("pt_benchmark", clock);
  return ok ? 0 : 1;
}

int cmd_defpot_stats(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const Stopwatch clock;
  Output out(cfg, "defpot-stats");
  const std::string hash = out.manifest.config_hash;
  std::ostringstream csv;
  csv << csv_head(hash) << "material,T_K,T_over_TD,n_modes,draws,rms_grid_eV,rms_quadrature_eV,ratio\n";
  std::ostringstream exps;
  exps << csv_head(hash) << "material,lowT_exponent\n";
  size_t point = 0;
  for (const std::string& name : cfg.defpot_materials) {
    const MaterialParams mat = resolve_material(cfg, name);
    const double T_D = derive_parameters(mat).T_D;
    const double L = cfg.L > 0.0 ? cfg.L : auto_box_length(mat, cfg.min_modes);
    for (const double T : temperatures_K(cfg, mat, cfg.defpot_T_over_TD)) {
      log << "defpot-stats: " << name << " T = " << T << " K\n";
      const DefpotStats s =
          defpot_stats(mat, T, cfg.N, L, cfg.defpot_draws, derive_seed(cfg.master_seed, point++),
                       cfg.scheme);
      const double ratio = s.rms_quadrature > 0.0 ? s.rms_grid / s.rms_quadrature : NAN;
      csv << name << ',' << num(T) << ',' << num(T / T_D) << ',' << s.n_modes << ',' << s.draws
          << ',' << num(s.rms_grid) << ',' << num(s.rms_quadrature) << ',' << num(ratio) << '\n';
    }
    std::vector<double> low;
    for (double r : cfg.defpot_lowT_over_TD) low.push_back(r * T_D);
    exps << name << ',' << num(lowT_exponent(mat, low)) << '\n';
  }
  out.file("defpot_stats.csv", csv.str());
  out.file("defpot_exponent.csv", exps.str());
  out.finish("defpot_stats", clock);
  return 0;
}

}  // namespace qacoustic
