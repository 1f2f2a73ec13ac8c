#include "npimcmc/involution.hpp"

#include <algorithm>
#include <cmath>

#include "npimcmc/grad.hpp"

namespace npimcmc {

void LeapfrogStepSpec::validate() const {
  if (L < 1) throw ConfigError("leapfrog: L must be at least 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ConfigError("leapfrog: epsilon must be finite and positive");
  if (!model) throw ConfigError("leapfrog: no model");
  if (!model->supports_gradient())
    throw GradientUnsupported("leapfrog: model '" + model->name() + "' is not smooth");
}

namespace {

bool is_position_update(std::size_t m) { return m % 3 == 2; }

void check_m(std::size_t m, const LeapfrogStepSpec& spec) {
  if (m < 1 || m > 3 * spec.L) throw PreconditionViolation("leapfrog: m out of range");
}

}  // namespace

RealState leapfrog_update(std::size_t m, const LeapfrogStepSpec& spec, bool direction,
                          const RealState& s) {
  check_m(m, spec);
  check_state(s);
  RealState out = s;
  double sign = direction ? 1.0 : -1.0;
  if (is_position_update(m)) {
    for (std::size_t i = 0; i < s.dim(); ++i) out.x[i] += sign * spec.epsilon * s.v[i];
  } else {
    RealVector g = grad_U(*spec.model, s.x);
    for (std::size_t i = 0; i < s.dim(); ++i) out.v[i] -= sign * 0.5 * spec.epsilon * g[i];
  }
  return out;
}

std::pair<double, double> leapfrog_slice(std::size_t m, const LeapfrogStepSpec& spec,
                                         bool direction, const RealState& s) {
  check_m(m, spec);
  check_state(s);
  if (s.dim() == 0) throw SliceInvalid("leapfrog slice: empty state");
  InstanceSearch found = search_instance(*spec.model, s.x);
  if (found.status != SearchStatus::found || found.instance.k >= s.dim())
    throw SliceInvalid("leapfrog slice: no supported instance below the top dimension");
  double q = s.x.back(), p = s.v.back();
  if (is_position_update(m)) return {q + (direction ? 1.0 : -1.0) * spec.epsilon * p, p};
  return {q, p};
}

namespace {

class LeapfrogUpdate final : public Bijection<double> {
 public:
  LeapfrogUpdate(std::size_t m, LeapfrogStepSpec spec, bool direction)
      : m_(m), spec_(std::move(spec)), direction_(direction) {
    spec_.validate();
    check_m(m_, spec_);
  }
  std::string name() const override { return "leapfrog_update"; }
  RealState apply(const RealState& s) const override {
    return leapfrog_update(m_, spec_, direction_, s);
  }
  std::pair<double, double> slice(const RealState& s) const override {
    return leapfrog_slice(m_, spec_, direction_, s);
  }
  bool is_involutive() const override { return false; }
  BijectionPtr<double> inverse() const override {
    return std::make_shared<LeapfrogUpdate>(m_, spec_, !direction_);
  }

 private:
  std::size_t m_;
  LeapfrogStepSpec spec_;
  bool direction_;
};

class LeapfrogTrajectory final : public Bijection<double> {
 public:
  LeapfrogTrajectory(LeapfrogStepSpec spec, bool direction)
      : spec_(std::move(spec)), direction_(direction) {
    spec_.validate();
  }
  std::string name() const override { return "leapfrog"; }
  RealState apply(const RealState& s) const override {
    RealState cur = s;
    for (std::size_t m = 1; m <= 3 * spec_.L; ++m) cur = leapfrog_update(m, spec_, direction_, cur);
    return cur;
  }
  bool is_involutive() const override { return false; }
  BijectionPtr<double> inverse() const override {
    return std::make_shared<LeapfrogTrajectory>(spec_, !direction_);
  }

 private:
  LeapfrogStepSpec spec_;
  bool direction_;
};

class HmcInvolution final : public Bijection<double> {
 public:
  explicit HmcInvolution(LeapfrogStepSpec spec) : trajectory_(std::move(spec), true) {}
  std::string name() const override { return "hmc"; }
  RealState apply(const RealState& s) const override {
    RealState out = trajectory_.apply(s);
    for (auto& p : out.v) p = -p;
    return out;
  }
  bool is_involutive() const override { return true; }
  BijectionPtr<double> inverse() const override { return shared_from_this(); }

 private:
  LeapfrogTrajectory trajectory_;
};

class BrokenReversal final : public Bijection<double> {
 public:
  std::string name() const override { return "broken_reversal"; }
  RealState apply(const RealState& s) const override {
    RealState out = s;
    std::reverse(out.x.begin(), out.x.end());
    std::reverse(out.v.begin(), out.v.end());
    return out;
  }
  bool is_involutive() const override { return true; }
  BijectionPtr<double> inverse() const override { return shared_from_this(); }
};

}  // namespace

BijectionPtr<double> leapfrog_update_family(std::size_t m, LeapfrogStepSpec spec, bool direction) {
  return std::make_shared<LeapfrogUpdate>(m, std::move(spec), direction);
}

BijectionPtr<double> leapfrog_trajectory(LeapfrogStepSpec spec, bool direction) {
  return std::make_shared<LeapfrogTrajectory>(std::move(spec), direction);
}

BijectionPtr<double> hmc_involution(LeapfrogStepSpec spec) {
  return std::make_shared<HmcInvolution>(std::move(spec));
}

BijectionPtr<double> broken_reversal_family() { return std::make_shared<BrokenReversal>(); }

double state_distance(const RealState& a, const RealState& b) {
  if (a.x.size() != b.x.size() || a.v.size() != b.v.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) d = std::max(d, std::abs(a.x[i] - b.x[i]));
  for (std::size_t i = 0; i < a.v.size(); ++i) d = std::max(d, std::abs(a.v[i] - b.v[i]));
  return d;
}

double state_distance(const EntropyState& a, const EntropyState& b) {
  if (a.x.size() != b.x.size() || a.v.size() != b.v.size()) return INFINITY;
  double d = 0.0;
  auto cmp = [&](const EntropyPair& p, const EntropyPair& q) {
    if (p.a != q.a) d = INFINITY;
    d = std::max(d, std::abs(p.r - q.r));
  };
  for (std::size_t i = 0; i < a.x.size(); ++i) cmp(a.x[i], b.x[i]);
  for (std::size_t i = 0; i < a.v.size(); ++i) cmp(a.v[i], b.v[i]);
  return d;
}

namespace {

template <class T>
bool commutes(const Bijection<T>& f, const Model& m, const State<T>& s, std::size_t k,
              double tol) {
  check_state(s);
  InstanceSearch found = search_instance(m, s.x);
  if (found.status != SearchStatus::found)
    throw PreconditionViolation("projection commutation: no supported instance");
  if (found.instance.k > k || k > s.dim())
    throw PreconditionViolation("projection commutation: k outside [instance dim, dim]");
  State<T> lhs = project(f.apply(s), k);
  State<T> rhs = f.apply(project(s, k));
  return state_distance(lhs, rhs) <= tol;
}

}  // namespace

bool check_projection_commutation(const Bijection<double>& f, const Model& m,
                                  const RealState& s, std::size_t k, double tol) {
  return commutes(f, m, s, k, tol);
}

bool check_projection_commutation(const Bijection<EntropyPair>& f, const Model& m,
                                  const EntropyState& s, std::size_t k, double tol) {
  return commutes(f, m, s, k, tol);
}

}  // namespace npimcmc
