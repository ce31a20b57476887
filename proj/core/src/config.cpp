#include "qacoustic/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "qacoustic/error.hpp"
#include "qacoustic/units.hpp"

namespace qacoustic {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Shortest round-trip representation; identical on every conforming platform.
std::string fmt_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigurationError("not a finite number: '" + s + "'");
  return v;
}

template <class Int>
Int parse_int(const std::string& s) {
  Int v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ConfigurationError("not an integer in range: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigurationError("not a boolean: '" + s + "'");
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt_double(v[i]);
  return out;
}

struct Entry {
  const char* section;
  const char* key;
  const char* type;
  const char* doc;
  bool hashed;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Entry dbl(const char* sec, const char* key, double RunConfig::*m, const char* doc) {
  return {sec, key, "float", doc, true,
          [m](RunConfig& c, const std::string& v) { c.*m = parse_double(v); },
          [m](const RunConfig& c) { return fmt_double(c.*m); }};
}

Entry opt_dbl(const char* sec, const char* key, std::optional<double> RunConfig::*m,
              const char* doc) {
  return {sec, key, "float|preset", doc, true,
          [m](RunConfig& c, const std::string& v) {
            if (v == "preset") c.*m = std::nullopt;
            else c.*m = parse_double(v);
          },
          [m](const RunConfig& c) { return (c.*m) ? fmt_double(*(c.*m)) : std::string("preset"); }};
}

template <class Int>
Entry integer(const char* sec, const char* key, Int RunConfig::*m, const char* doc,
              bool hashed = true) {
  return {sec, key, "int", doc, hashed,
          [m](RunConfig& c, const std::string& v) { c.*m = parse_int<Int>(v); },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

Entry boolean(const char* sec, const char* key, bool RunConfig::*m, const char* doc) {
  return {sec, key, "bool", doc, true,
          [m](RunConfig& c, const std::string& v) { c.*m = parse_bool(v); },
          [m](const RunConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

Entry text(const char* sec, const char* key, std::string RunConfig::*m, const char* doc,
           bool hashed = true) {
  return {sec, key, "string", doc, hashed,
          [m](RunConfig& c, const std::string& v) { c.*m = v; },
          [m](const RunConfig& c) { return c.*m; }};
}

Entry dbl_list(const char* sec, const char* key, std::vector<double> RunConfig::*m,
               const char* doc) {
  return {sec, key, "float list", doc, true,
          [m](RunConfig& c, const std::string& v) {
            std::vector<double> out;
            for (const auto& s : split_list(v)) out.push_back(parse_double(s));
            c.*m = out;
          },
          [m](const RunConfig& c) { return join(c.*m); }};
}

Entry str_list(const char* sec, const char* key, std::vector<std::string> RunConfig::*m,
               const char* doc) {
  return {sec, key, "string list", doc, true,
          [m](RunConfig& c, const std::string& v) { c.*m = split_list(v); },
          [m](const RunConfig& c) { return join(c.*m); }};
}

const std::vector<Entry>& schema() {
  static const std::vector<Entry> entries = {
      text("material", "name", &RunConfig::material, "material preset to start from"),
      opt_dbl("material", "m_eff", &RunConfig::m_eff, "effective mass in electron masses"),
      opt_dbl("material", "v_s", &RunConfig::v_s, "sound speed in m/s"),
      opt_dbl("material", "a_nm", &RunConfig::a_nm, "lattice constant in nm"),
      opt_dbl("material", "E_d", &RunConfig::E_d, "deformation potential constant in eV"),
      opt_dbl("material", "rho", &RunConfig::rho, "mass density in kg/m^3"),
      integer("grid", "N", &RunConfig::N, "grid points per axis, power of two"),
      dbl("grid", "L", &RunConfig::L, "box length in nm, 0 = auto from min_modes"),
      integer("grid", "min_modes", &RunConfig::min_modes, "bath size the auto box must hold"),
      dbl("grid", "sigma", &RunConfig::sigma, "packet width in nm, 0 = 0.02 L"),
      dbl("grid", "q_cut_fraction", &RunConfig::q_cut_fraction, "mode cutoff as a fraction of q_D"),
      dbl("time", "dt_fs", &RunConfig::dt_fs, "time step in fs, 0 = heuristic"),
      dbl("time", "window_fs", &RunConfig::window_fs, "relaxation run length in fs"),
      integer("time", "record_stride", &RunConfig::record_stride, "steps between records, 0 = auto"),
      integer("ensemble", "n_realizations", &RunConfig::n_realizations, "realizations per ensemble"),
      integer("ensemble", "master_seed", &RunConfig::master_seed, "root of every derived seed"),
      integer("ensemble", "max_parallel", &RunConfig::max_parallel, "worker threads, 0 = all cores",
              false),
      dbl_list("physics", "T_over_TD", &RunConfig::T_over_TD, "relaxation sweep temperatures / T_D"),
      dbl_list("physics", "T_list_K", &RunConfig::T_list_K, "absolute temperatures, overrides T_over_TD"),
      {"physics", "scheme", "random_phase|full_gaussian", "thermal amplitude sampling", true,
       [](RunConfig& c, const std::string& v) { c.scheme = sampling_scheme_from_string(v); },
       [](const RunConfig& c) { return std::string(to_string(c.scheme)); }},
      boolean("physics", "feedback", &RunConfig::feedback, "evolve bath amplitudes self-consistently"),
      boolean("physics", "noise_enabled", &RunConfig::noise_enabled, "stochastic branch on"),
      str_list("spread", "materials", &RunConfig::spread_materials, "materials in the spread sweep"),
      dbl_list("spread", "T_over_TD", &RunConfig::spread_T_over_TD, "spread sweep temperatures / T_D"),
      dbl("spread", "window_fs", &RunConfig::spread_window_fs, "averaging window for xi in fs"),
      integer("spread", "n_realizations", &RunConfig::spread_realizations, "realizations per point"),
      dbl("noise", "mode_K", &RunConfig::noise_mode_K, "mode energy of the test oscillator in K"),
      integer("noise", "n_steps", &RunConfig::noise_steps, "trajectory length"),
      integer("noise", "steps_per_period", &RunConfig::noise_steps_per_period,
              "time resolution of the test oscillator"),
      integer("noise", "n_realizations", &RunConfig::noise_realizations, "independent trajectories"),
      integer("noise", "max_lag", &RunConfig::noise_max_lag, "largest lag compared"),
      boolean("noise", "corrupt_kernel", &RunConfig::noise_corrupt_kernel,
              "negative control: generate with a detuned kernel"),
      str_list("pt", "materials", &RunConfig::pt_materials, "materials in the rate benchmark"),
      dbl_list("pt", "T_over_TD", &RunConfig::pt_T_over_TD, "benchmark temperatures / T_D"),
      str_list("defpot", "materials", &RunConfig::defpot_materials, "materials sampled"),
      dbl_list("defpot", "T_over_TD", &RunConfig::defpot_T_over_TD, "sampled temperatures / T_D"),
      dbl_list("defpot", "lowT_over_TD", &RunConfig::defpot_lowT_over_TD,
               "temperatures for the low-T exponent fit / T_D"),
      integer("defpot", "draws", &RunConfig::defpot_draws, "thermal draws per temperature"),
      text("output", "directory", &RunConfig::out_dir, "where results are written", false),
  };
  return entries;
}

const Entry* find_entry(const std::string& section, const std::string& key) {
  for (const auto& e : schema())
    if (section == e.section && key == e.key) return &e;
  return nullptr;
}

std::string canonical(const RunConfig& cfg, bool hashed_only) {
  std::string out;
  std::string section;
  for (const auto& e : schema()) {
    if (hashed_only && !e.hashed) continue;
    if (section != e.section) {
      section = e.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += std::string(e.key) + " = " + e.get(cfg) + "\n";
  }
  return out;
}

}  // namespace

RunConfig config_preset(const std::string& name) {
  RunConfig c;
  if (name == "default") return c;
  if (name == "desk") {
    c.N = 64;
    c.sigma = 0.4;
    c.window_fs = 10.0;
    c.n_realizations = 24;
    c.T_over_TD = {0.1, 0.5, 1.0, 2.0};
    c.spread_T_over_TD = {0.2, 1.0, 2.0};
    c.spread_window_fs = 20.0;
    c.spread_realizations = 12;
    c.defpot_T_over_TD = {0.0, 1.0};
    return c;
  }
  throw ConfigurationError("unknown preset '" + name + "'");
}

std::vector<std::string> config_preset_names() { return {"default", "desk"}; }

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigurationError(where + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      const bool known = std::any_of(schema().begin(), schema().end(),
                                     [&](const Entry& e) { return section == e.section; });
      if (!known) throw ConfigurationError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigurationError(where + "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ConfigurationError(where + "key outside of any section");
    const Entry* e = find_entry(section, key);
    if (!e) throw ConfigurationError(where + "unknown key " + section + "." + key);
    try {
      e->set(base, value);
    } catch (const Error& err) {
      throw ConfigurationError(where + section + "." + key + ": " + err.what());
    }
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void apply_env_overrides(RunConfig& cfg) {
  if (const char* dir = std::getenv("QACOUSTIC_OUT_DIR"); dir && *dir) cfg.out_dir = dir;
  if (const char* par = std::getenv("QACOUSTIC_MAX_PARALLEL"); par && *par) {
    try {
      cfg.max_parallel = parse_int<unsigned>(trim(par));
    } catch (const Error& e) {
      throw ConfigurationError(std::string("QACOUSTIC_MAX_PARALLEL: ") + e.what());
    }
  }
}

std::string serialize(const RunConfig& cfg) { return canonical(cfg, false); }

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical(cfg, true)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_schema() {
  const RunConfig defaults;
  std::string out;
  for (const auto& e : schema()) {
    out += std::string(e.section) + "." + e.key + " (" + e.type + ") default '" +
           e.get(defaults) + "': " + e.doc + "\n";
  }
  return out;
}

MaterialParams resolve_material(const RunConfig& cfg, const std::string& name) {
  MaterialParams m = material_preset(name);
  if (name == cfg.material) {
    if (cfg.m_eff) m.m_eff = *cfg.m_eff;
    if (cfg.v_s) m.v_s = *cfg.v_s;
    if (cfg.a_nm) m.a = *cfg.a_nm;
    if (cfg.E_d) m.E_d = *cfg.E_d;
    if (cfg.rho) m.rho = *cfg.rho;
    validate(m);
  }
  return m;
}

MaterialParams resolve_material(const RunConfig& cfg) { return resolve_material(cfg, cfg.material); }

double auto_box_length(const MaterialParams& mat, int min_modes, double q_cut_fraction) {
  const double q_cut = q_cut_fraction * derive_parameters(mat).q_D;
  // Mode density is L^2 / (4 pi^2) per unit reciprocal area.
  const double estimate = std::sqrt(4.0 * units::kPi * min_modes) / q_cut;
  const double step = 0.4;
  double L = std::max(step, std::floor(estimate / step) * step);
  for (int guard = 0; guard < 1000; ++guard, L += step) {
    if (enumerate_modes(mat, L, q_cut).size() >= static_cast<size_t>(min_modes)) return L;
  }
  throw ConfigurationError("no box length reaches the requested mode count");
}

std::vector<double> temperatures_K(const RunConfig& cfg, const MaterialParams& mat,
                                   const std::vector<double>& relative) {
  if (!cfg.T_list_K.empty()) return cfg.T_list_K;
  const double T_D = derive_parameters(mat).T_D;
  std::vector<double> out;
  out.reserve(relative.size());
  for (double r : relative) out.push_back(r * T_D);
  return out;
}

void validate(const RunConfig& cfg) {
  validate(resolve_material(cfg));
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigurationError(what);
  };
  require(cfg.N >= 4 && (cfg.N & (cfg.N - 1)) == 0, "grid.N must be a power of two >= 4");
  require(cfg.L >= 0.0, "grid.L must be >= 0");
  require(cfg.min_modes >= 1, "grid.min_modes must be >= 1");
  require(cfg.sigma >= 0.0, "grid.sigma must be >= 0");
  require(cfg.q_cut_fraction > 0.0 && cfg.q_cut_fraction <= 1.0,
          "grid.q_cut_fraction must lie in (0, 1]");
  require(cfg.dt_fs >= 0.0, "time.dt_fs must be >= 0");
  require(cfg.window_fs > 0.0, "time.window_fs must be > 0");
  require(cfg.record_stride >= 0, "time.record_stride must be >= 0");
  require(cfg.n_realizations >= 1, "ensemble.n_realizations must be >= 1");
  auto nonneg = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; });
  };
  require(!cfg.T_over_TD.empty() || !cfg.T_list_K.empty(), "physics needs temperatures");
  require(nonneg(cfg.T_over_TD) && nonneg(cfg.T_list_K), "temperatures must be >= 0");
  require(cfg.spread_window_fs > 0.0, "spread.window_fs must be > 0");
  require(cfg.spread_realizations >= 1, "spread.n_realizations must be >= 1");
  require(nonneg(cfg.spread_T_over_TD), "spread temperatures must be >= 0");
  require(cfg.noise_mode_K > 0.0, "noise.mode_K must be > 0");
  require(cfg.noise_steps >= 2, "noise.n_steps must be >= 2");
  require(cfg.noise_steps_per_period >= 4, "noise.steps_per_period must be >= 4");
  require(cfg.noise_realizations >= 2, "noise.n_realizations must be >= 2");
  require(cfg.noise_max_lag >= 0 && cfg.noise_max_lag < cfg.noise_steps,
          "noise.max_lag must lie in [0, n_steps)");
  for (double t : cfg.pt_T_over_TD) require(t > 0.0, "pt temperatures must be > 0");
  require(nonneg(cfg.defpot_T_over_TD), "defpot temperatures must be >= 0");
  require(cfg.defpot_lowT_over_TD.size() >= 2, "defpot.lowT_over_TD needs two temperatures");
  for (double t : cfg.defpot_lowT_over_TD) require(t > 0.0, "defpot low-T points must be > 0");
  require(cfg.defpot_draws >= 1, "defpot.draws must be >= 1");
  for (const auto* list : {&cfg.spread_materials, &cfg.pt_materials, &cfg.defpot_materials})
    for (const auto& name : *list) resolve_material(cfg, name);
}

TrajectoryConfig make_trajectory_config(const RunConfig& cfg, const MaterialParams& mat,
                                        double T_K, bool noise_enabled, double window_fs) {
  if (!(window_fs > 0.0)) throw ConfigurationError("run window must be positive");
  TrajectoryConfig t;
  t.material = mat;
  t.N = cfg.N;
  t.L = cfg.L > 0.0 ? cfg.L : auto_box_length(mat, cfg.min_modes, cfg.q_cut_fraction);
  t.q_cut_fraction = cfg.q_cut_fraction;
  t.T_K = T_K;
  t.scheme = cfg.scheme;
  t.noise_enabled = noise_enabled;
  t.feedback = cfg.feedback;
  t.sigma = cfg.sigma;
  const double window = units::fs_to_internal(window_fs);
  const double dt_target = cfg.dt_fs > 0.0 ? units::fs_to_internal(cfg.dt_fs) : recommended_dt(t);
  t.n_steps = std::max<long>(1, static_cast<long>(std::ceil(window / dt_target * (1.0 - 1e-12))));
  t.dt = window / static_cast<double>(t.n_steps);
  t.record_stride = cfg.record_stride > 0 ? cfg.record_stride : std::max<long>(1, t.n_steps / 100);
  validate(t);
  return t;
}

}  // namespace qacoustic
