#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "npimcmc/dual.hpp"
#include "npimcmc/trace.hpp"

namespace npimcmc {

enum class SampleRequest { real, boolean };

struct Terminated {
  double log_weight = 0.0;
  std::size_t consumed = 0;
  double value = 0.0;  // the program's return value
};
struct NeedsMore {
  SampleRequest next = SampleRequest::real;
};
struct Rejected {};

using RunResult = std::variant<Terminated, NeedsMore, Rejected>;

// Supplies values to a running program, one index at a time.
class ValueSource {
 public:
  virtual ~ValueSource() = default;
  // nullopt when no value exists at index i. A value of the wrong type makes
  // the run Rejected.
  virtual std::optional<Value> fetch(std::size_t i, SampleRequest req) = 0;
};

class TraceSource final : public ValueSource {
 public:
  explicit TraceSource(const Trace& t) : t_(t) {}
  std::optional<Value> fetch(std::size_t i, SampleRequest) override;

 private:
  const Trace& t_;
};

// Answers real requests with r and bool requests with a.
class EntropySource final : public ValueSource {
 public:
  explicit EntropySource(const EntropyVector& x) : x_(x) {}
  std::optional<Value> fetch(std::size_t i, SampleRequest req) override;

 private:
  const EntropyVector& x_;
};

class RealSource final : public ValueSource {
 public:
  explicit RealSource(const RealVector& q) : q_(q) {}
  std::optional<Value> fetch(std::size_t i, SampleRequest) override;

 private:
  const RealVector& q_;
};

namespace detail {
struct NeedsMoreSignal {
  SampleRequest next;
};
struct RejectSignal {};
}  // namespace detail

// Handle a program uses to draw values and score the run. S is double for
// plain execution and Dual for gradient passes; in a Dual pass the real at
// index `active` carries tangent 1.
template <class S>
class Tracer {
 public:
  explicit Tracer(ValueSource& src, std::size_t active = static_cast<std::size_t>(-1))
      : src_(src), active_(active) {}

  S sample_real() {
    Value v = fetch(SampleRequest::real);
    if (!is_real(v)) throw detail::RejectSignal{};
    std::size_t i = consumed_ - 1;
    if constexpr (std::is_same_v<S, Dual>)
      return Dual(as_real(v), i == active_ ? 1.0 : 0.0);
    else
      return as_real(v);
  }

  bool sample_bool() {
    Value v = fetch(SampleRequest::boolean);
    if (is_real(v)) throw detail::RejectSignal{};
    return as_bool(v);
  }

  // Multiplies the weight by w; w <= 0 rejects the run.
  void score(const S& w) {
    double p = primal(w);
    if (!(p > 0.0) || !std::isfinite(p)) throw detail::RejectSignal{};
    log_weight_ += log_of(w);
  }

  // Multiplies the weight by exp(lw).
  void score_log(const S& lw) {
    double p = primal(lw);
    if (std::isnan(p) || p == -INFINITY || p == INFINITY) throw detail::RejectSignal{};
    log_weight_ += lw;
  }

  [[noreturn]] void reject() { throw detail::RejectSignal{}; }

  const S& log_weight() const { return log_weight_; }
  std::size_t consumed() const { return consumed_; }

 private:
  static S log_of(const S& w) {
    using std::log;
    return log(w);
  }

  Value fetch(SampleRequest req) {
    auto v = src_.fetch(consumed_, req);
    if (!v) throw detail::NeedsMoreSignal{req};
    ++consumed_;
    return *v;
  }

  ValueSource& src_;
  std::size_t active_;
  std::size_t consumed_ = 0;
  S log_weight_{};
};

// A trace-consuming probabilistic program.
class Model {
 public:
  virtual ~Model() = default;
  virtual std::string name() const = 0;
  // Constructor parameters, e.g. "obs=2".
  virtual std::string describe() const { return name(); }
  virtual bool supports_gradient() const = 0;
  // True if the program ever draws coins, which calls for the hybrid space.
  virtual bool has_coins() const { return false; }

  virtual double program(Tracer<double>& t) const = 0;
  // Gradient pass; GradientUnsupported unless overridden.
  virtual double program(Tracer<Dual>& t) const;

  // Executes the program against a value source.
  virtual RunResult execute(ValueSource& src) const;
  RunResult run(const Trace& t) const;

  // Dual-number execution on a real vector; returns the log weight with
  // tangent d/dq_active. Empty if the run does not terminate with a weight.
  std::optional<Dual> run_dual(const RealVector& q, std::size_t active) const;

  // log p(datum | trace) for predictive checks; unsupported by default.
  virtual double predictive_log_density(const Trace& t, double datum) const;
};

using ModelPtr = std::shared_ptr<const Model>;

// log w(t); -inf outside the support.
double density(const Model& m, const Trace& t);
double return_value(const Model& m, const Trace& t);

struct Instance {
  Trace trace;
  double log_weight = 0.0;
  std::size_t k = 0;
  double value = 0.0;
};

enum class SearchStatus { found, needs_more, rejected };

struct InstanceSearch {
  SearchStatus status = SearchStatus::needs_more;
  Instance instance;
};

// Drives the model with the pairs of x; reports whether the unique supported
// instance exists, more values are needed, or the run was rejected.
InstanceSearch search_instance(const Model& m, const EntropyVector& x);
// Real-only variant: a bool request is a type mismatch.
InstanceSearch search_instance(const Model& m, const RealVector& x);

std::optional<Instance> find_supported_instance(const Model& m, const EntropyVector& x);

struct PrefixViolation {
  std::size_t probe = 0;
  std::vector<std::size_t> supported_lengths;
};

struct PrefixReport {
  std::size_t probes = 0;
  std::vector<PrefixViolation> violations;
  bool ok() const { return violations.empty(); }
};

PrefixReport check_prefix_property(const Model& m, const std::vector<Trace>& probes);

class Stream;

// Forward-simulates the program from its prior. Empty if the run is rejected
// or exceeds max_len values.
std::optional<Trace> sample_prior(const Model& m, Stream& s, std::size_t max_len = 10000);
// Repeats sample_prior until a supported trace appears.
Trace draw_initial_trace(const Model& m, Stream& s, std::size_t attempts = 1000);

// Helpers usable with both double and Dual scalars.
// log N(x; mu, sigma^2). Either argument may be a Dual.
template <class A, class B>
auto normal_log_pdf(const A& x, const B& mu, double sigma) {
  auto z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

template <class S>
S log_sum_exp(const std::vector<S>& xs) {
  using std::exp;
  using std::log;
  if (xs.empty()) return S(-INFINITY);
  double m = primal(xs[0]);
  for (const auto& x : xs) m = std::max(m, primal(x));
  if (!std::isfinite(m)) return S(m);
  S acc(0.0);
  for (const auto& x : xs) acc += exp(x - m);
  return log(acc) + m;
}

// Wraps a generic callable `double f(Tracer<S>&)` as a Model.
template <class F>
class ProgramModel final : public Model {
 public:
  ProgramModel(std::string name, std::string describe, bool smooth, bool coins, F f)
      : name_(std::move(name)),
        describe_(std::move(describe)),
        smooth_(smooth),
        coins_(coins),
        f_(std::move(f)) {}

  std::string name() const override { return name_; }
  std::string describe() const override { return describe_; }
  bool supports_gradient() const override { return smooth_; }
  bool has_coins() const override { return coins_; }
  double program(Tracer<double>& t) const override { return f_(t); }
  double program(Tracer<Dual>& t) const override { return f_(t); }

 private:
  std::string name_, describe_;
  bool smooth_;
  bool coins_;
  F f_;
};

template <class F>
ModelPtr make_program_model(std::string name, bool smooth, F f, std::string describe = "",
                            bool coins = false) {
  if (describe.empty()) describe = name;
  return std::make_shared<ProgramModel<F>>(std::move(name), std::move(describe), smooth, coins,
                                           std::move(f));
}

}  // namespace npimcmc
