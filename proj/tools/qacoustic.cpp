// Command-line driver. Settings are layered: preset, then --config file, then
// the two environment overrides, then command-line flags.
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qacoustic/config.hpp"
#include "qacoustic/error.hpp"
#include "qacoustic/experiments.hpp"

namespace {

struct GlobalFlags {
  std::string preset = "default";
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  bool print_config = false;
};

qacoustic::RunConfig assemble(const GlobalFlags& f) {
  qacoustic::RunConfig cfg = qacoustic::config_preset(f.preset);
  if (!f.config_path.empty()) cfg = qacoustic::load_config(f.config_path, cfg);
  qacoustic::apply_env_overrides(cfg);
  if (f.seed) cfg.master_seed = *f.seed;
  if (f.out_dir) cfg.out_dir = *f.out_dir;
  if (f.threads) cfg.max_parallel = *f.threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic electron-phonon wavepacket experiments"};
  app.set_version_flag("--version", qacoustic::kToolVersion);
  app.require_subcommand(0, 1);

  GlobalFlags flags;
  app.add_option("--preset", flags.preset, "starting configuration")
      ->check(CLI::IsMember(qacoustic::config_preset_names()))
      ->capture_default_str();
  app.add_option("--config", flags.config_path, "sectioned key = value file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "master seed");
  app.add_option("--out", flags.out_dir, "output directory");
  app.add_option("--threads", flags.threads, "worker threads, 0 = all cores");
  app.add_flag("--print-config", flags.print_config,
               "print the merged configuration and its hash, then exit");
  bool print_schema = false;
  app.add_flag("--schema", print_schema, "list every configuration key, then exit");

  bool corrupt = false;
  auto* relax = app.add_subcommand("relax-sweep", "relaxation time against temperature");
  auto* spread = app.add_subcommand("spread-sweep", "time-averaged spread against temperature");
  auto* noise = app.add_subcommand("noise-validate", "noise covariance statistics check");
  noise->add_flag("--corrupt-kernel", corrupt, "negative control; must fail");
  auto* pt = app.add_subcommand("pt-benchmark", "perturbation-theory rate table");
  auto* defpot = app.add_subcommand("defpot-stats", "deformation field statistics");

  CLI11_PARSE(app, argc, argv);

  try {
    if (print_schema) {
      std::cout << qacoustic::config_schema();
      return 0;
    }
    qacoustic::RunConfig cfg = assemble(flags);
    if (corrupt) cfg.noise_corrupt_kernel = true;
    if (flags.print_config) {
      std::cout << "# config_hash=" << qacoustic::config_hash(cfg) << '\n'
                << qacoustic::serialize(cfg);
      return 0;
    }
    if (app.got_subcommand(relax)) return qacoustic::cmd_relax_sweep(cfg, std::cerr);
    if (app.got_subcommand(spread)) return qacoustic::cmd_spread_sweep(cfg, std::cerr);
    if (app.got_subcommand(noise)) return qacoustic::cmd_noise_validate(cfg, std::cerr);
    if (app.got_subcommand(pt)) return qacoustic::cmd_pt_benchmark(cfg, std::cerr);
    if (app.got_subcommand(defpot)) return qacoustic::cmd_defpot_stats(cfg, std::cerr);
    std::cerr << app.help();
    return 2;
  } catch (const qacoustic::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
