#pragma once

#include <memory>
#include <string>
#include <utility>

#include "npimcmc/model.hpp"
#include "npimcmc/space.hpp"

namespace npimcmc {

// A family of bijections Phi(n) on n-dimensional states. The dimension is
// read off the state.
template <class T>
class Bijection : public std::enable_shared_from_this<Bijection<T>> {
 public:
  virtual ~Bijection() = default;
  virtual std::string name() const = 0;
  virtual State<T> apply(const State<T>& s) const = 0;
  virtual double log_abs_det_jac(const State<T>&) const { return 0.0; }
  // Last coordinate pair of apply(s), for states whose supported instance
  // sits below dim(s). The default evaluates the full map.
  virtual std::pair<T, T> slice(const State<T>& s) const {
    State<T> out = apply(s);
    return {out.x.back(), out.v.back()};
  }
  virtual bool is_involutive() const = 0;
  virtual std::shared_ptr<const Bijection<T>> inverse() const {
    throw InverseUnavailable("'" + name() + "' has no inverse");
  }
};

template <class T>
using BijectionPtr = std::shared_ptr<const Bijection<T>>;

template <class T>
class Swap final : public Bijection<T> {
 public:
  std::string name() const override { return "swap"; }
  State<T> apply(const State<T>& s) const override { return State<T>{s.v, s.x}; }
  std::pair<T, T> slice(const State<T>& s) const override { return {s.v.back(), s.x.back()}; }
  bool is_involutive() const override { return true; }
  BijectionPtr<T> inverse() const override { return this->shared_from_this(); }
};

template <class T>
BijectionPtr<T> swap_involution() {
  return std::make_shared<Swap<T>>();
}

struct LeapfrogStepSpec {
  std::size_t L = 1;
  double epsilon = 0.1;
  ModelPtr model;

  void validate() const;
};

// The m-th of the 3L endofunctions making up L leapfrog steps (1-based m;
// m % 3 == 2 is the full position update, the rest are half momentum
// updates). direction == false applies the inverse update.
RealState leapfrog_update(std::size_t m, const LeapfrogStepSpec& spec, bool direction,
                          const RealState& s);

// Last coordinate pair of leapfrog_update, for states whose supported instance
// has dimension below dim(s). Throws SliceInvalid otherwise.
std::pair<double, double> leapfrog_slice(std::size_t m, const LeapfrogStepSpec& spec,
                                         bool direction, const RealState& s);

BijectionPtr<double> leapfrog_update_family(std::size_t m, LeapfrogStepSpec spec, bool direction);

// All 3L updates in order; direction false is the exact inverse map.
BijectionPtr<double> leapfrog_trajectory(LeapfrogStepSpec spec, bool direction);

// L leapfrog steps followed by momentum negation. Involutive.
BijectionPtr<double> hmc_involution(LeapfrogStepSpec spec);

// Reverses coordinate order in both components. Involutive and volume
// preserving but mixes coordinates across any projection boundary.
BijectionPtr<double> broken_reversal_family();

// Selects f or its inverse by a direction flag.
template <class T>
class DirectionWrapped {
 public:
  explicit DirectionWrapped(BijectionPtr<T> f) : forward_(f), backward_(f->inverse()) {}
  const Bijection<T>& get(bool direction) const { return direction ? *forward_ : *backward_; }
  BijectionPtr<T> ptr(bool direction) const { return direction ? forward_ : backward_; }

 private:
  BijectionPtr<T> forward_, backward_;
};

template <class T>
DirectionWrapped<T> direction_wrap(BijectionPtr<T> f) {
  return DirectionWrapped<T>(std::move(f));
}

// Largest per-coordinate difference between two states; infinity when their
// shapes or coins differ.
double state_distance(const RealState& a, const RealState& b);
double state_distance(const EntropyState& a, const EntropyState& b);

// Checks proj(Phi(m)(s), k) == Phi(k)(proj(s, k)) to `tol`. Requires the
// supported instance of s.x to have dimension <= k <= dim(s).
bool check_projection_commutation(const Bijection<double>& f, const Model& m,
                                  const RealState& s, std::size_t k, double tol = 1e-9);
bool check_projection_commutation(const Bijection<EntropyPair>& f, const Model& m,
                                  const EntropyState& s, std::size_t k, double tol = 1e-9);

}  // namespace npimcmc
