#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "npimcmc/chain.hpp"
#include "npimcmc/sampler.hpp"

namespace npimcmc::cli {

inline constexpr int kSpecVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

struct ExperimentSpec {
  std::string model_name;
  YAML::Node model_params;
  std::string sampler_name;
  std::vector<std::string> mixture_members;
  SamplerConfig config;
  std::size_t n_samples = 0;
  std::size_t n_chains = 1;
  std::size_t burn_in = 0;
  std::optional<Trace> init;
  std::vector<std::string> outputs;
  std::vector<double> lppd_test_data;

  bool wants(const std::string& output) const;
};

// Throws ConfigError on any schema violation.
ExperimentSpec parse_spec(const YAML::Node& root);
ExperimentSpec load_spec(const std::filesystem::path& path);

// Registry: geometric, geometric_real, igmm, random_walk, conjugate_normal,
// broken-fixture. Throws ConfigError for unknown names or bad parameters.
ModelPtr make_model(const std::string& name, const YAML::Node& params);
const std::vector<std::string>& model_names();

SamplerPtr build_sampler(const ExperimentSpec& spec, const ModelPtr& model);

// Worker count: NPIMCMC_THREADS if set, else hardware concurrency, capped by
// the number of chains.
std::size_t worker_count(std::size_t n_chains);

// Runs every chain and writes samples.csv / stats.json into out_dir.
// Returns the process exit code.
int run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                   std::ostream& err);

// Property suite behind `check`. Prints one line per property.
int run_checks(const std::string& model_name, std::size_t probes, std::uint64_t seed,
               std::ostream& out, std::ostream& err);

}  // namespace npimcmc::cli
