#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qacoustic/bath.hpp"
#include "qacoustic/materials.hpp"
#include "qacoustic/propagator.hpp"

namespace qacoustic {

/// Everything an experiment needs, as read from a sectioned key = value file.
/// Temperatures are given relative to the material's Debye temperature so one
/// list serves every material; `T_list_K`, when non-empty, replaces them.
struct RunConfig {
  // [material]
  std::string material = "copper";
  std::optional<double> m_eff, v_s, a_nm, E_d, rho;

  // [grid]
  int N = 256;
  double L = 0.0;  ///< nm; 0 picks the smallest multiple of 0.4 nm holding min_modes
  int min_modes = 300;
  double sigma = 0.0;  ///< nm; 0 selects 0.02 L
  double q_cut_fraction = 1.0;

  // [time]
  double dt_fs = 0.0;  ///< 0 derives the step from the stability heuristic
  double window_fs = 40.0;
  long record_stride = 0;  ///< 0 records about 100 points per run

  // [ensemble]
  size_t n_realizations = 200;
  std::uint64_t master_seed = 1;
  unsigned max_parallel = 0;  ///< 0 uses the hardware concurrency

  // [physics]
  std::vector<double> T_over_TD = {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  std::vector<double> T_list_K;
  SamplingScheme scheme = SamplingScheme::RandomPhase;
  bool feedback = false;
  bool noise_enabled = true;

  // [spread]
  std::vector<std::string> spread_materials = {"copper", "bi2212"};
  std::vector<double> spread_T_over_TD = {0.2, 0.5, 1.0, 2.0, 5.0};
  double spread_window_fs = 40.0;
  size_t spread_realizations = 100;

  // [noise]
  double noise_mode_K = 300.0;  ///< mode energy expressed as a temperature
  int noise_steps = 256;
  int noise_steps_per_period = 64;
  size_t noise_realizations = 20000;
  int noise_max_lag = 64;
  bool noise_corrupt_kernel = false;

  // [pt]
  std::vector<std::string> pt_materials = {"copper", "bi2212"};
  std::vector<double> pt_T_over_TD = {0.2, 0.5, 1.0, 2.0, 5.0, 10.0};

  // [defpot]
  std::vector<std::string> defpot_materials = {"copper", "bi2212"};
  std::vector<double> defpot_T_over_TD = {0.0, 0.5, 1.0, 2.0};
  std::vector<double> defpot_lowT_over_TD = {0.01, 0.02, 0.04, 0.08};
  size_t defpot_draws = 200;

  // [output] (not part of the hash)
  std::string out_dir = "qacoustic-out";

  bool operator==(const RunConfig&) const = default;
};

/// Built-in starting points: "default" (production grid) and "desk" (smoke scale).
RunConfig config_preset(const std::string& name);
std::vector<std::string> config_preset_names();

/// Applies `text` on top of `base`. Throws ConfigurationError naming the line on
/// unknown sections or keys and on malformed values.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// QACOUSTIC_OUT_DIR and QACOUSTIC_MAX_PARALLEL; nothing else is read from the
/// environment.
void apply_env_overrides(RunConfig& cfg);

/// Canonical text in schema order; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& cfg);

/// FNV-1a 64 of the canonical text without output and parallelism keys, so the
/// hash names the physics and statistics only. 16 lowercase hex digits.
std::string config_hash(const RunConfig& cfg);

/// One line per key: section.key, type, default, description.
std::string config_schema();

/// Throws ConfigurationError on values no experiment can use.
void validate(const RunConfig& cfg);

/// The [material] entry with overrides; other names resolve to plain presets.
MaterialParams resolve_material(const RunConfig& cfg, const std::string& name);
MaterialParams resolve_material(const RunConfig& cfg);

/// Smallest multiple of 0.4 nm whose bath holds at least `min_modes` modes.
double auto_box_length(const MaterialParams& mat, int min_modes, double q_cut_fraction = 1.0);

/// Temperatures in K for a material, from T_list_K or the relative list.
std::vector<double> temperatures_K(const RunConfig& cfg, const MaterialParams& mat,
                                   const std::vector<double>& relative);

/// Propagator settings for one run of `window_fs`; dt is snapped so the window is
/// an integer number of steps, and the result passes qacoustic::validate.
TrajectoryConfig make_trajectory_config(const RunConfig& cfg, const MaterialParams& mat,
                                        double T_K, bool noise_enabled, double window_fs);

}  // namespace qacoustic
