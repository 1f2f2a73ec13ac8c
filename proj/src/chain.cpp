#include "npimcmc/chain.hpp"

#include <chrono>
#include <limits>

namespace npimcmc {

namespace {
constexpr std::uint64_t kInitStep = std::numeric_limits<std::uint64_t>::max();
}

Trace default_initial_trace(const Model& m, std::uint64_t seed, std::uint64_t chain) {
  CounterStream s(stream_id(seed, chain, Purpose::init, kInitStep));
  return draw_initial_trace(m, s);
}

ChainResult run_chain(const Sampler& sampler, const Trace& init, const ChainOptions& opts) {
  auto start = std::chrono::steady_clock::now();
  ChainResult out;
  auto& st = out.stats;
  try {
    if (!std::isfinite(density(sampler.model(), init)))
      throw InitialTraceOutOfSupport("initial trace is outside the support: " + to_string(init));
    StepStreams init_streams(opts.seed, opts.chain, kInitStep);
    ChainState cur = sampler.initial_state(init, init_streams);
    std::size_t total = opts.burn_in + opts.n;
    out.samples.reserve(opts.n);
    for (std::size_t i = 0; i < total; ++i) {
      StepStreams streams(opts.seed, opts.chain, i);
      StepInfo info = sampler.step(cur, streams);
      ++st.steps;
      st.accepted += info.accepted;
      st.total_extensions += info.extensions;
      st.max_extensions = std::max(st.max_extensions, info.extensions);
      st.halted += info.halted;
      st.flips += info.direction_flipped;
      st.slice_checks += info.slice_checks;
      st.max_slice_error = std::max(st.max_slice_error, info.max_slice_error);
      if (sampler.persistent() && info.direction_flipped == info.accepted)
        st.flips_match_rejections = false;
      out.records.push_back(
          {i, info.accepted, cur.trace.size(), info.extensions, info.direction_flipped});
      if (i >= opts.burn_in) {
        out.samples.push_back(cur.trace);
        st.dims.push_back(cur.trace.size());
      }
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  if (st.steps > 0) st.acceptance_rate = double(st.accepted) / double(st.steps);
  st.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace npimcmc
