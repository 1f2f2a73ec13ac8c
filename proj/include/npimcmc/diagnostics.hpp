#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "npimcmc/model.hpp"

namespace npimcmc {

struct EmpiricalDist {
  std::map<std::int64_t, std::size_t> bins;
  std::size_t total = 0;

  void add(std::int64_t key, std::size_t count = 1);
  double prob(std::int64_t key) const;
};

// 1/2 sum_k |emp(k) - exact(k)| over `support`, plus the remainder bucket
// holding everything outside it.
double tvd(const EmpiricalDist& emp, const std::function<double(std::int64_t)>& exact,
           const std::vector<std::int64_t>& support);
double tvd(const EmpiricalDist& a, const EmpiricalDist& b);

// (1/2)^(k+1) and its support truncated at k_max.
double geometric_pmf(std::int64_t k);
std::vector<std::int64_t> geometric_support(std::int64_t k_max = 20);

// Effective sample size with Geyer's initial positive sequence. The
// integrated autocorrelation time is floored at 1/log10(N) so antithetic
// chains stay finite.
double ess(const std::vector<double>& series);

// sum_d log (1/S) sum_s p(d | sample_s)
double lppd(const std::vector<Trace>& samples, const Model& m, const std::vector<double>& test);

// sup_x |F_emp(x) - cdf(x)|
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf);
double normal_cdf(double x, double mu = 0.0, double sigma = 1.0);

}  // namespace npimcmc
