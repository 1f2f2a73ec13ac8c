#pragma once

#include <optional>
#include <string>
#include <vector>

#include "npimcmc/sampler.hpp"

namespace npimcmc {

struct StepRecord {
  std::size_t step = 0;
  bool accepted = false;
  std::size_t dim = 0;  // dimension of the chain's trace after the step
  std::size_t extensions = 0;
  bool direction_flipped = false;
};

struct ChainStats {
  std::size_t steps = 0;
  std::size_t accepted = 0;
  double acceptance_rate = 0.0;
  std::size_t total_extensions = 0;
  std::size_t max_extensions = 0;
  std::size_t halted = 0;
  std::size_t flips = 0;
  // False if a direction flip ever happened on an accepted step or a
  // rejection kept the direction (persistent samplers only).
  bool flips_match_rejections = true;
  std::size_t slice_checks = 0;
  double max_slice_error = 0.0;
  std::vector<std::size_t> dims;  // per recorded sample
  double wall_time_s = 0.0;
};

struct ChainResult {
  std::vector<Trace> samples;  // post burn-in
  std::vector<StepRecord> records;
  ChainStats stats;
  std::optional<std::string> error;  // set when a step threw; output is partial
};

struct ChainOptions {
  std::size_t n = 0;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
  std::uint64_t chain = 0;
};

// Runs burn_in + n steps; step i draws from the streams of (seed, chain, i).
// Deterministic given the options.
ChainResult run_chain(const Sampler& sampler, const Trace& init, const ChainOptions& opts);

// Initial trace drawn from the prior using the init stream of (seed, chain).
Trace default_initial_trace(const Model& m, std::uint64_t seed, std::uint64_t chain);

}  // namespace npimcmc
