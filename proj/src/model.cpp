#include "npimcmc/model.hpp"

#include "npimcmc/errors.hpp"
#include "npimcmc/rng.hpp"

namespace npimcmc {

std::optional<Value> TraceSource::fetch(std::size_t i, SampleRequest) {
  if (i >= t_.size()) return std::nullopt;
  return t_[i];
}

std::optional<Value> EntropySource::fetch(std::size_t i, SampleRequest req) {
  if (i >= x_.size()) return std::nullopt;
  if (req == SampleRequest::real) return Value{x_[i].r};
  return Value{x_[i].a};
}

std::optional<Value> RealSource::fetch(std::size_t i, SampleRequest) {
  if (i >= q_.size()) return std::nullopt;
  return Value{q_[i]};
}

double Model::program(Tracer<Dual>&) const {
  throw GradientUnsupported("model '" + name() + "' has no gradient pass");
}

RunResult Model::execute(ValueSource& src) const {
  Tracer<double> t(src);
  try {
    double value = program(t);
    return Terminated{t.log_weight(), t.consumed(), value};
  } catch (const detail::NeedsMoreSignal& s) {
    return NeedsMore{s.next};
  } catch (const detail::RejectSignal&) {
    return Rejected{};
  }
}

RunResult Model::run(const Trace& t) const {
  TraceSource src(t);
  return execute(src);
}

std::optional<Dual> Model::run_dual(const RealVector& q, std::size_t active) const {
  if (!supports_gradient())
    throw GradientUnsupported("model '" + name() + "' is not smooth");
  RealSource src(q);
  Tracer<Dual> t(src, active);
  try {
    program(t);
    return t.log_weight();
  } catch (const detail::NeedsMoreSignal&) {
    return std::nullopt;
  } catch (const detail::RejectSignal&) {
    return std::nullopt;
  }
}

double Model::predictive_log_density(const Trace&, double) const {
  throw PreconditionViolation("model '" + name() + "' has no predictive density");
}

double density(const Model& m, const Trace& t) {
  RunResult r = m.run(t);
  if (const auto* term = std::get_if<Terminated>(&r); term && term->consumed == t.size())
    return term->log_weight;
  return -INFINITY;
}

double return_value(const Model& m, const Trace& t) {
  RunResult r = m.run(t);
  const auto* term = std::get_if<Terminated>(&r);
  if (!term || term->consumed != t.size())
    throw NoSupportedInstance("return_value: trace outside the support");
  return term->value;
}

namespace {

// Records the values handed to the program.
class Recorder final : public ValueSource {
 public:
  explicit Recorder(ValueSource& s) : inner_(s) {}
  std::optional<Value> fetch(std::size_t i, SampleRequest req) override {
    auto v = inner_.fetch(i, req);
    if (v && i == rec.size()) rec.push_back(*v);
    return v;
  }
  Trace rec;

 private:
  ValueSource& inner_;
};

InstanceSearch search_with(const Model& m, ValueSource& src) {
  InstanceSearch out;
  Recorder recorder(src);
  RunResult r = m.execute(recorder);
  if (std::holds_alternative<NeedsMore>(r)) {
    out.status = SearchStatus::needs_more;
    return out;
  }
  if (std::holds_alternative<Rejected>(r)) {
    out.status = SearchStatus::rejected;
    return out;
  }
  const auto& term = std::get<Terminated>(r);
  out.status = SearchStatus::found;
  out.instance.k = term.consumed;
  out.instance.log_weight = term.log_weight;
  out.instance.value = term.value;
  recorder.rec.resize(term.consumed);
  out.instance.trace = std::move(recorder.rec);
  return out;
}

}  // namespace

InstanceSearch search_instance(const Model& m, const EntropyVector& x) {
  EntropySource src(x);
  return search_with(m, src);
}

InstanceSearch search_instance(const Model& m, const RealVector& x) {
  RealSource src(x);
  return search_with(m, src);
}

std::optional<Instance> find_supported_instance(const Model& m, const EntropyVector& x) {
  InstanceSearch s = search_instance(m, x);
  if (s.status != SearchStatus::found) return std::nullopt;
  return s.instance;
}

PrefixReport check_prefix_property(const Model& m, const std::vector<Trace>& probes) {
  PrefixReport report;
  report.probes = probes.size();
  for (std::size_t p = 0; p < probes.size(); ++p) {
    std::vector<std::size_t> supported;
    Trace prefix;
    const Trace& t = probes[p];
    for (std::size_t len = 0; len <= t.size(); ++len) {
      if (len > 0) prefix.push_back(t[len - 1]);
      if (std::isfinite(density(m, prefix))) supported.push_back(len);
    }
    if (supported.size() > 1) report.violations.push_back({p, std::move(supported)});
  }
  return report;
}

namespace {

class PriorSource final : public ValueSource {
 public:
  PriorSource(Stream& s, std::size_t max_len) : s_(s), max_len_(max_len) {}
  std::optional<Value> fetch(std::size_t i, SampleRequest req) override {
    while (drawn.size() <= i) {
      if (drawn.size() >= max_len_) return std::nullopt;
      if (req == SampleRequest::real)
        drawn.push_back(Value{s_.normal()});
      else
        drawn.push_back(Value{s_.coin()});
    }
    return drawn[i];
  }
  Trace drawn;

 private:
  Stream& s_;
  std::size_t max_len_;
};

}  // namespace

std::optional<Trace> sample_prior(const Model& m, Stream& s, std::size_t max_len) {
  PriorSource src(s, max_len);
  RunResult r = m.execute(src);
  const auto* term = std::get_if<Terminated>(&r);
  if (!term) return std::nullopt;
  src.drawn.resize(term->consumed);
  if (!std::isfinite(density(m, src.drawn))) return std::nullopt;
  return src.drawn;
}

Trace draw_initial_trace(const Model& m, Stream& s, std::size_t attempts) {
  for (std::size_t i = 0; i < attempts; ++i)
    if (auto t = sample_prior(m, s)) return *t;
  throw InitialTraceOutOfSupport("no supported trace found from the prior of '" + m.name() + "'");
}

}  // namespace npimcmc
