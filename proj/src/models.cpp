#include "npimcmc/models.hpp"

#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "npimcmc/errors.hpp"
#include "npimcmc/rng.hpp"

namespace npimcmc {

ModelPtr geometric() {
  return make_program_model("geometric", false, [](auto& t) {
    double k = 0;
    while (t.sample_bool()) {
      t.sample_real();
      k += 1;
    }
    return k;
  }, "geometric", true);
}

ModelPtr geometric_real() {
  return make_program_model("geometric_real", true, [](auto& t) {
    double k = 0;
    while (primal(t.sample_real()) < 0.0) {
      t.sample_real();
      k += 1;
    }
    return k;
  });
}

namespace {

class IgmmModel final : public Model {
 public:
  explicit IgmmModel(std::vector<double> data) : data_(std::move(data)) {}

  std::string name() const override { return "igmm"; }
  std::string describe() const override {
    return fmt::format("igmm(n_data={})", data_.size());
  }
  bool supports_gradient() const override { return true; }
  double program(Tracer<double>& t) const override { return run_program(t); }
  double program(Tracer<Dual>& t) const override { return run_program(t); }

  double predictive_log_density(const Trace& t, double datum) const override {
    if (!std::isfinite(density(*this, t)))
      throw NoSupportedInstance("igmm: trace outside the support");
    std::size_t k = static_cast<std::size_t>(std::floor(std::abs(as_real(t[0]))));
    std::vector<double> means;
    for (std::size_t i = 0; i < k; ++i) means.push_back(as_real(t[i + 1]));
    return component_log_density(datum, means);
  }

 private:
  template <class S>
  static S component_log_density(double d, const std::vector<S>& means) {
    std::vector<S> terms;
    terms.reserve(means.size());
    double log_weight = -std::log(static_cast<double>(means.size()));
    for (const auto& mu : means) terms.push_back(normal_log_pdf(d, mu, 1.0) + log_weight);
    return log_sum_exp(terms);
  }

  template <class S>
  double run_program(Tracer<S>& t) const {
    S first = t.sample_real();
    auto k = static_cast<std::size_t>(std::floor(std::abs(primal(first))));
    if (k == 0) t.reject();
    std::vector<S> means;
    means.reserve(k);
    for (std::size_t i = 0; i < k; ++i) means.push_back(t.sample_real());
    for (double d : data_) t.score_log(component_log_density(d, means));
    return static_cast<double>(k);
  }

  std::vector<double> data_;
};

}  // namespace

ModelPtr igmm(std::vector<double> data) { return std::make_shared<IgmmModel>(std::move(data)); }

ModelPtr random_walk(double observed_distance, double obs_std, double bound) {
  if (!(obs_std > 0.0) || !(bound > 0.0))
    throw PreconditionViolation("random_walk: obs_std and bound must be positive");
  auto describe = fmt::format("random_walk(observed_distance={}, obs_std={}, bound={})",
                              observed_distance, obs_std, bound);
  return make_program_model(
      "random_walk", true,
      [=](auto& t) {
        using S = std::decay_t<decltype(t.log_weight())>;
        using std::abs;
        S position(0.0);
        S distance(0.0);
        while (std::abs(primal(position)) < bound) {
          S step = t.sample_real();
          position += step;
          distance += abs(step);
        }
        t.score_log(normal_log_pdf(observed_distance, distance, obs_std));
        return primal(distance);
      },
      describe);
}

ModelPtr conjugate_normal(double obs) {
  return make_program_model(
      "conjugate_normal", true,
      [=](auto& t) {
        auto x = t.sample_real();
        t.score_log(normal_log_pdf(obs, x, 1.0));
        return primal(x);
      },
      fmt::format("conjugate_normal(obs={})", obs));
}

namespace {

class BrokenPrefixFixture final : public Model {
 public:
  std::string name() const override { return "broken-fixture"; }
  bool supports_gradient() const override { return false; }
  double program(Tracer<double>& t) const override {
    t.sample_real();
    return 0.0;
  }
  RunResult execute(ValueSource& src) const override {
    if (!src.fetch(0, SampleRequest::real)) return NeedsMore{SampleRequest::real};
    if (!src.fetch(1, SampleRequest::real)) return Terminated{0.0, 1, 0.0};
    return Terminated{0.0, 2, 0.0};
  }
};

}  // namespace

ModelPtr broken_prefix_fixture() { return std::make_shared<BrokenPrefixFixture>(); }

GroundTruthMixture make_mixture_data(const std::vector<double>& means, std::size_t n,
                                     std::uint64_t seed) {
  if (means.empty()) throw PreconditionViolation("make_mixture_data: no components");
  GroundTruthMixture out{means, {}};
  CounterStream s(stream_id(seed, 0, Purpose::init, 0));
  for (std::size_t i = 0; i < n; ++i) {
    // Round-robin component assignment keeps the component counts balanced.
    out.data.push_back(means[i % means.size()] + s.normal());
  }
  return out;
}

const GroundTruthMixture& default_igmm_data() {
  static const GroundTruthMixture data = make_mixture_data({-4.0, 0.0, 4.0}, 30, 2024);
  return data;
}

}  // namespace npimcmc
