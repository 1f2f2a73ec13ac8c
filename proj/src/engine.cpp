#include "npimcmc/engine.hpp"

namespace npimcmc::engine {

RealVector lift_trace(const Trace& t, Stream&, const double*) {
  RealVector x;
  x.reserve(t.size());
  for (const auto& v : t) {
    if (!is_real(v))
      throw PreconditionViolation("a real-only state space cannot hold a coin; use the hybrid space");
    x.push_back(as_real(v));
  }
  return x;
}

EntropyVector lift_trace(const Trace& t, Stream& pairing, const EntropyPair*) {
  EntropyVector x;
  x.reserve(t.size());
  for (const auto& v : t) {
    if (is_real(v))
      x.emplace_back(as_real(v), pairing.coin());
    else
      x.emplace_back(pairing.normal(), as_bool(v));
  }
  return x;
}

Instance initial_instance(const Model& m, const Trace& t0) {
  RunResult r = m.run(t0);
  const auto* term = std::get_if<Terminated>(&r);
  if (!term || term->consumed != t0.size())
    throw InitialTraceOutOfSupport("initial trace is outside the support: " + to_string(t0));
  return Instance{t0, term->log_weight, t0.size(), term->value};
}

}  // namespace npimcmc::engine
