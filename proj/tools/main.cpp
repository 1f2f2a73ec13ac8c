#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "experiment.hpp"

int main(int argc, char** argv) {
  using namespace npimcmc::cli;
  CLI::App app{"Nonparametric involutive MCMC experiments"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string spec_path, out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  auto* run = app.add_subcommand("run", "Run the chains described by a spec file");
  run->add_option("spec", spec_path, "Spec file (YAML)")->required();
  run->add_option("--seed", seed_override, "Override the spec's seed");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();

  std::string model_name;
  std::size_t probes = 1000;
  std::uint64_t check_seed = 0;
  auto* check = app.add_subcommand("check", "Run the property suite on a built-in model");
  check->add_option("model", model_name, "Model name")->required();
  check->add_option("probes_pos", probes, "Number of probes");
  check->add_option("seed_pos", check_seed, "Seed");
  check->add_option("--probes", probes, "Number of probes")->capture_default_str();
  check->add_option("--seed", check_seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  if (*run) {
    ExperimentSpec spec;
    try {
      spec = load_spec(spec_path);
    } catch (const npimcmc::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitValidation;
    }
    if (seed_override) spec.config.seed = *seed_override;
    try {
      return run_experiment(spec, out_dir, std::cerr);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  try {
    return run_checks(model_name, probes, check_seed, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
