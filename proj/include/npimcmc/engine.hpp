#pragma once

// Shared machinery behind the NP-iMCMC steps: lifting traces into the state
// space, the extend loops, and the acceptance log-ratio.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "npimcmc/involution.hpp"
#include "npimcmc/kernels.hpp"
#include "npimcmc/model.hpp"

namespace npimcmc::engine {

// Real-only spaces take the trace as is; hybrid spaces pair each value with a
// fresh partner of the other type.
RealVector lift_trace(const Trace& t, Stream& pairing, const double*);
EntropyVector lift_trace(const Trace& t, Stream& pairing, const EntropyPair*);

template <class T>
std::vector<T> lift(const Trace& t, Stream& pairing) {
  return lift_trace(t, pairing, static_cast<const T*>(nullptr));
}

// The supported trace a step starts from.
Instance initial_instance(const Model& m, const Trace& t0);

template <class T>
void extend(State<T>& s, Stream& ext_x, Stream& ext_v) {
  s.x.push_back(Coord<T>::draw(ext_x));
  s.v.push_back(Coord<T>::draw(ext_v));
}

// log of w(t) * phi(x) * Khat(x, v, k): one side of the acceptance ratio.
template <class T>
double log_side(double log_weight, const AuxKernel<T>& kernel, const State<T>& s, std::size_t k) {
  return log_weight + Coord<T>::stock_log_density(s.x) +
         extended_kernel_log_pdf(kernel, s.x, s.v, k);
}

template <class T>
struct CoreResult {
  std::optional<Instance> proposal;  // empty when the program rejected
  State<T> initial;                  // (x0, v0) after extension
  State<T> final;                    // Phi(n)(x0, v0)
  std::size_t extensions = 0;
};

// Steps 3 of the core algorithm: apply the involution, and while no prefix
// of x is supported extend (x0, v0) and re-apply it from scratch.
template <class T>
CoreResult<T> core_extend(const Model& m, const Bijection<T>& inv, State<T> s0, Stream& ext_x,
                          Stream& ext_v, std::size_t dim_cap) {
  CoreResult<T> out;
  while (true) {
    State<T> s;
    InstanceSearch found;
    try {
      s = inv.apply(s0);
      found = search_instance(m, s.x);
    } catch (const NeedsMoreValues&) {
      // An intermediate point of the map needs coordinates past s0.
      found.status = SearchStatus::needs_more;
    } catch (const NoSupportedInstance&) {
      // The map passes through a point the program rejects.
      out.final = s0;
      break;
    }
    if (found.status == SearchStatus::found) {
      out.proposal = std::move(found.instance);
      out.final = std::move(s);
      break;
    }
    if (found.status == SearchStatus::rejected) {
      out.final = std::move(s);
      break;
    }
    if (s0.dim() >= dim_cap)
      throw DimensionCapExceeded("extension loop passed the dimension cap");
    extend(s0, ext_x, ext_v);
    ++out.extensions;
  }
  out.initial = std::move(s0);
  return out;
}

// Applies a sequence of updates one at a time, checking support after each
// and extending every intermediate state through slices when it fails.
// Resumable: advance() can be called again with a larger target.
template <class T>
class MultistepRun {
 public:
  using UpdateAt = std::function<const Bijection<T>&(std::size_t l)>;  // 1-based

  MultistepRun(const Model& m, State<T> s0, Stream& ext_x, Stream& ext_v, std::size_t dim_cap,
               bool verify_slices = false)
      : m_(m), ext_x_(ext_x), ext_v_(ext_v), dim_cap_(dim_cap), verify_(verify_slices) {
    states_.push_back(std::move(s0));
  }

  // Returns false if some intermediate state was rejected by the program.
  bool advance(const UpdateAt& update_at, std::size_t target) {
    while (states_.size() <= target) {
      std::size_t l = states_.size();
      while (true) {
        try {
          states_.push_back(update_at(l).apply(states_[l - 1]));
          break;
        } catch (const NeedsMoreValues&) {
          grow(update_at, l - 1);
        } catch (const NoSupportedInstance&) {
          return false;
        }
      }
      while (true) {
        InstanceSearch found = search_instance(m_, states_[l].x);
        if (found.status == SearchStatus::found) {
          last_ = std::move(found.instance);
          break;
        }
        if (found.status == SearchStatus::rejected) return false;
        grow(update_at, l);
      }
    }
    return true;
  }

  double log_det_sum(const UpdateAt& update_at) const {
    double s = 0.0;
    for (std::size_t l = 1; l < states_.size(); ++l)
      s += update_at(l).log_abs_det_jac(states_[l - 1]);
    return s;
  }

  const std::vector<State<T>>& states() const { return states_; }
  const Instance& last_instance() const { return last_; }
  std::size_t extensions() const { return extensions_; }
  std::size_t slice_checks() const { return slice_checks_; }
  double max_slice_error() const { return max_slice_error_; }

 private:
  // Extends states[0] by one coordinate and states[1..l] through slices.
  void grow(const UpdateAt& update_at, std::size_t l) {
    if (states_[0].dim() >= dim_cap_)
      throw DimensionCapExceeded("extension loop passed the dimension cap");
    extend(states_[0], ext_x_, ext_v_);
    for (std::size_t i = 1; i <= l; ++i) {
      auto [y, u] = update_at(i).slice(states_[i - 1]);
      states_[i].x.push_back(y);
      states_[i].v.push_back(u);
    }
    ++extensions_;
    if (verify_ && l > 0) check_against_full_recompute(update_at, l);
  }

  void check_against_full_recompute(const UpdateAt& update_at, std::size_t l) {
    State<T> cur = states_[0];
    for (std::size_t i = 1; i <= l; ++i) {
      cur = update_at(i).apply(cur);
      max_slice_error_ = std::max(max_slice_error_, state_distance(cur, states_[i]));
    }
    ++slice_checks_;
  }

  const Model& m_;
  Stream& ext_x_;
  Stream& ext_v_;
  std::size_t dim_cap_;
  bool verify_;
  std::vector<State<T>> states_;
  Instance last_;
  std::size_t extensions_ = 0;
  std::size_t slice_checks_ = 0;
  double max_slice_error_ = 0.0;
};

inline bool accept(double log_ratio, Stream& uniform) {
  double u = uniform.uniform();
  return std::log(u) < log_ratio;
}

}  // namespace npimcmc::engine
