#pragma once

#include <vector>

#include "npimcmc/rng.hpp"
#include "npimcmc/trace.hpp"

namespace npimcmc {

// Per-coordinate operations for real-only (double) and hybrid (EntropyPair)
// state spaces.
template <class T>
struct Coord;

template <>
struct Coord<double> {
  static double stock_log_density(const std::vector<double>& x) {
    return gaussian_log_density(x);
  }
  static double draw(Stream& s) { return s.normal(); }
  static double real(double x) { return x; }
  static double with_real(double, double r) { return r; }
};

template <>
struct Coord<EntropyPair> {
  static double stock_log_density(const EntropyVector& x) { return entropy_log_density(x); }
  static EntropyPair draw(Stream& s) {
    double r = s.normal();
    return EntropyPair(r, s.coin());
  }
  static double real(const EntropyPair& p) { return p.r; }
  static EntropyPair with_real(const EntropyPair& p, double r) { return EntropyPair(r, p.a); }
};

template <class T>
RealVector reals_of(const std::vector<T>& x) {
  RealVector out;
  out.reserve(x.size());
  for (const auto& c : x) out.push_back(Coord<T>::real(c));
  return out;
}

}  // namespace npimcmc
