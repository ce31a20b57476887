#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qacoustic/config.hpp"
#include "qacoustic/noise.hpp"
#include "qacoustic/observables.hpp"

namespace qacoustic {

inline constexpr const char* kToolVersion = "0.1.0";

// ---- building blocks, also used by the acceptance suite --------------------

/// Stochastic and mean-field ensembles for one temperature. Both share the
/// master seed, hence the same thermal amplitudes realization by realization.
struct RelaxPoint {
  double T_K = 0.0;
  ObservableSeries stochastic;
  ObservableSeries meanfield;
  RelaxationFit fit_st;
  RelaxationFit fit_mf;
  std::vector<std::uint64_t> seeds;
};
RelaxPoint relax_point(const RunConfig& cfg, const MaterialParams& mat, double T_K,
                       std::uint64_t master_seed, size_t n_realizations, double window_fs);

struct DefpotStats {
  double T_K = 0.0;
  double rms_grid = 0.0;        ///< eV, over every grid point of every draw
  double rms_quadrature = 0.0;  ///< eV, continuum integral
  size_t n_modes = 0;
  size_t draws = 0;
};
/// Samples `draws` thermal fields on an N x N grid of side L.
DefpotStats defpot_stats(const MaterialParams& mat, double T_K, int N, double L, size_t draws,
                         std::uint64_t seed, SamplingScheme scheme = SamplingScheme::RandomPhase);

/// Least-squares slope of ln(rms^2) against ln T from the quadrature.
double lowT_exponent(const MaterialParams& mat, const std::vector<double>& T_K);

/// Single-mode covariance check. With `corrupt` the generator runs at 1.25x the
/// frequency the comparison assumes, a negative control that must fail.
CovarianceValidator::Report noise_validation(double mode_K, int n_steps, int steps_per_period,
                                             size_t realizations, int max_lag,
                                             std::uint64_t master_seed, bool corrupt);

// ---- output ---------------------------------------------------------------

/// CSV of one series: the observable columns, prefixed by a "# config_hash=" line.
void write_series_csv(std::ostream& os, const ObservableSeries& s, const std::string& hash);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::string status = "ok";
  struct Ensemble {
    std::string label;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> seeds;
    size_t n_divergent = 0;
  };
  std::vector<Ensemble> ensembles;
  size_t n_divergent = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> files;
  std::vector<std::pair<std::string, bool>> flags;
};
std::string to_json(const RunManifest& m);
/// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

// ---- subcommands ------------------------------------------------------------

/// Each writes into cfg.out_dir, logs progress to `log`, and returns a process
/// exit code: 0 success, 1 a checked property failed, 2 a run aborted.
int cmd_relax_sweep(const RunConfig& cfg, std::ostream& log);
int cmd_spread_sweep(const RunConfig& cfg, std::ostream& log);
int cmd_noise_validate(const RunConfig& cfg, std::ostream& log);
int cmd_pt_benchmark(const RunConfig& cfg, std::ostream& log);
int cmd_defpot_stats(const RunConfig& cfg, std::ostream& log);

}  // namespace qacoustic
