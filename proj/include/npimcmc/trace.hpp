#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "npimcmc/errors.hpp"

namespace npimcmc {

// A single trace entry: a real draw or a coin flip.
using Value = std::variant<double, bool>;
using Trace = std::vector<Value>;
using RealVector = std::vector<double>;

Value make_real(double r);
inline Value make_bool(bool a) { return Value{a}; }

inline bool is_real(const Value& v) { return std::holds_alternative<double>(v); }
inline double as_real(const Value& v) { return std::get<double>(v); }
inline bool as_bool(const Value& v) { return std::get<bool>(v); }

// Throws InvalidValue if any real entry is NaN or infinite.
void validate(const Trace& t);

// "[-0.2, T, 3.1]"
std::string to_string(const Trace& t);
// "-0.2;T;3.1", lossless for reals.
std::string to_csv_field(const Trace& t);

struct EntropyPair {
  double r = 0.0;
  bool a = false;

  EntropyPair() = default;
  EntropyPair(double r_, bool a_);

  friend bool operator==(const EntropyPair&, const EntropyPair&) = default;
};

using EntropyVector = std::vector<EntropyPair>;

double log_std_normal(double r);
double gaussian_log_density(const RealVector& v);
double entropy_log_density(const EntropyVector& x);

// Pairs each real with `coins[i]` and each bool with `reals[i]`. Both partner
// vectors must be at least as long as the trace.
EntropyVector pair_trace(const Trace& t, const RealVector& reals,
                         const std::vector<bool>& coins);

// Parameter/auxiliary state. Index maps are the identity, so both components
// always have the same length.
template <class T>
struct State {
  std::vector<T> x;
  std::vector<T> v;

  std::size_t dim() const { return x.size(); }
  friend bool operator==(const State&, const State&) = default;
};

using RealState = State<double>;
using EntropyState = State<EntropyPair>;

template <class T>
State<T> project(const State<T>& s, std::size_t k) {
  if (k > s.dim())
    throw PreconditionViolation("project: k exceeds state dimension");
  return State<T>{std::vector<T>(s.x.begin(), s.x.begin() + k),
                  std::vector<T>(s.v.begin(), s.v.begin() + k)};
}

template <class T>
State<T> drop_prefix(const State<T>& s, std::size_t k) {
  if (k > s.dim())
    throw PreconditionViolation("drop_prefix: k exceeds state dimension");
  return State<T>{std::vector<T>(s.x.begin() + k, s.x.end()),
                  std::vector<T>(s.v.begin() + k, s.v.end())};
}

template <class T>
State<T> concat(const State<T>& a, const State<T>& b) {
  State<T> out = a;
  out.x.insert(out.x.end(), b.x.begin(), b.x.end());
  out.v.insert(out.v.end(), b.v.begin(), b.v.end());
  return out;
}

template <class T>
void check_state(const State<T>& s) {
  if (s.x.size() != s.v.size())
    throw PreconditionViolation("state components differ in dimension");
}

}  // namespace npimcmc
