#include "npimcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <spdlog/spdlog.h>

namespace npimcmc {

void EmpiricalDist::add(std::int64_t key, std::size_t count) {
  bins[key] += count;
  total += count;
}

double EmpiricalDist::prob(std::int64_t key) const {
  auto it = bins.find(key);
  if (it == bins.end() || total == 0) return 0.0;
  return double(it->second) / double(total);
}

double tvd(const EmpiricalDist& emp, const std::function<double(std::int64_t)>& exact,
           const std::vector<std::int64_t>& support) {
  if (emp.total == 0) throw PreconditionViolation("tvd: empty distribution");
  std::set<std::int64_t> keys(support.begin(), support.end());
  double sum = 0.0, exact_mass = 0.0, emp_mass = 0.0;
  for (auto k : keys) {
    double p = exact(k);
    double q = emp.prob(k);
    exact_mass += p;
    emp_mass += q;
    sum += std::abs(q - p);
  }
  double remainder = std::abs((1.0 - emp_mass) - std::max(0.0, 1.0 - exact_mass));
  return std::clamp(0.5 * (sum + remainder), 0.0, 1.0);
}

double tvd(const EmpiricalDist& a, const EmpiricalDist& b) {
  if (a.total == 0 || b.total == 0) throw PreconditionViolation("tvd: empty distribution");
  std::set<std::int64_t> keys;
  for (const auto& [k, _] : a.bins) keys.insert(k);
  for (const auto& [k, _] : b.bins) keys.insert(k);
  double sum = 0.0;
  for (auto k : keys) sum += std::abs(a.prob(k) - b.prob(k));
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

double geometric_pmf(std::int64_t k) { return k < 0 ? 0.0 : std::ldexp(1.0, -int(k) - 1); }

std::vector<std::int64_t> geometric_support(std::int64_t k_max) {
  std::vector<std::int64_t> out;
  for (std::int64_t k = 0; k <= k_max; ++k) out.push_back(k);
  return out;
}

double ess(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 10) throw PreconditionViolation("ess: need at least 10 values");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= double(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (series[i] - mean) * (series[i + lag] - mean);
    return s / double(n);
  };
  double c0 = autocov(0);
  if (c0 <= 0.0) {
    spdlog::info("ess: constant series, reporting N");
    return double(n);
  }
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(double(n)));
  return double(n) / tau;
}

double lppd(const std::vector<Trace>& samples, const Model& m, const std::vector<double>& test) {
  if (samples.empty()) throw PreconditionViolation("lppd: no samples");
  double total = 0.0;
  const double log_s = std::log(double(samples.size()));
  std::vector<double> terms(samples.size());
  for (double d : test) {
    for (std::size_t s = 0; s < samples.size(); ++s) terms[s] = m.predictive_log_density(samples[s], d);
    total += log_sum_exp(terms) - log_s;
  }
  return total;
}

double normal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw PreconditionViolation("ks_statistic: no values");
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
  }
  return d;
}

}  // namespace npimcmc
