#include "npimcmc/trace.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

namespace npimcmc {

namespace {

void require_finite(double r) {
  if (!std::isfinite(r)) throw InvalidValue("non-finite real in trace");
}

std::string format_value(const Value& v) {
  if (is_real(v)) return fmt::format("{}", as_real(v));
  return as_bool(v) ? "T" : "F";
}

}  // namespace

Value make_real(double r) {
  require_finite(r);
  return Value{r};
}

void validate(const Trace& t) {
  for (const auto& v : t)
    if (is_real(v)) require_finite(as_real(v));
}

std::string to_string(const Trace& t) {
  std::string out = "[";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ", ";
    out += format_value(t[i]);
  }
  return out + "]";
}

std::string to_csv_field(const Trace& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ';';
    out += format_value(t[i]);
  }
  return out;
}

EntropyPair::EntropyPair(double r_, bool a_) : r(r_), a(a_) { require_finite(r_); }

double log_std_normal(double r) {
  static const double c = -0.5 * std::log(2.0 * std::numbers::pi);
  return c - 0.5 * r * r;
}

double gaussian_log_density(const RealVector& v) {
  double s = 0.0;
  for (double r : v) s += log_std_normal(r);
  return s;
}

double entropy_log_density(const EntropyVector& x) {
  double s = 0.0;
  for (const auto& p : x) s += log_std_normal(p.r) - std::numbers::ln2;
  return s;
}

EntropyVector pair_trace(const Trace& t, const RealVector& reals,
                         const std::vector<bool>& coins) {
  if (reals.size() < t.size() || coins.size() < t.size())
    throw PreconditionViolation("pair_trace: partner vectors too short");
  EntropyVector out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (is_real(t[i]))
      out.emplace_back(as_real(t[i]), coins[i]);
    else
      out.emplace_back(reals[i], as_bool(t[i]));
  }
  return out;
}

}  // namespace npimcmc
