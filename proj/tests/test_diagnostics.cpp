#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "npimcmc/diagnostics.hpp"
#include "npimcmc/models.hpp"
#include "npimcmc/rng.hpp"

using namespace npimcmc;

namespace {

const double kLogRoot2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

Trace reals(std::initializer_list<double> xs) {
  Trace t;
  for (double x : xs) t.push_back(make_real(x));
  return t;
}

}  // namespace

TEST(Tvd, ExactPmfGivesZero) {
  EmpiricalDist emp;
  // 2^21 draws laid out exactly as (1/2)^(k+1), remainder included.
  std::size_t total = std::size_t{1} << 21;
  for (std::int64_t k = 0; k <= 20; ++k) emp.add(k, total >> (k + 1));
  emp.add(21, total >> 21);
  EXPECT_NEAR(tvd(emp, geometric_pmf, geometric_support(20)), 0.0, 1e-12);
}

TEST(Tvd, PointMassAgainstGeometric) {
  EmpiricalDist emp;
  emp.add(0, 100);
  EXPECT_NEAR(tvd(emp, geometric_pmf, geometric_support(20)), 0.5, 1e-12);
}

TEST(Tvd, DisjointSupports) {
  EmpiricalDist a, b;
  a.add(0, 5);
  a.add(1, 5);
  b.add(2, 3);
  EXPECT_DOUBLE_EQ(tvd(a, b), 1.0);
  EXPECT_DOUBLE_EQ(tvd(a, a), 0.0);
}

TEST(Tvd, RemainderBucketCountsTail) {
  EmpiricalDist emp;
  emp.add(50, 1);
  // All empirical mass is past k = 20: |1 - 2^-21| on the tail plus the pmf
  // mass inside, halved.
  double inside = 1.0 - std::pow(0.5, 21);
  EXPECT_NEAR(tvd(emp, geometric_pmf, geometric_support(20)),
              0.5 * (inside + (1.0 - std::pow(0.5, 21))), 1e-12);
}

TEST(Ess, IidSeries) {
  CounterStream s(1);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = s.normal();
  double e = ess(xs);
  EXPECT_GE(e, 0.8 * xs.size());
  EXPECT_LE(e, 1.2 * xs.size());
}

TEST(Ess, AlternatingSeriesIsAntitheticButFinite) {
  std::vector<double> xs(1000);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = i % 2 == 0 ? 1.0 : -1.0;
  double e = ess(xs);
  EXPECT_TRUE(std::isfinite(e));
  EXPECT_GT(e, double(xs.size()));
}

TEST(Ess, Ar1Factor) {
  CounterStream s(2);
  const double rho = 0.5;
  std::vector<double> xs(100000);
  double x = s.normal() / std::sqrt(1.0 - rho * rho);
  for (auto& v : xs) {
    x = rho * x + s.normal();
    v = x;
  }
  double expect = xs.size() * (1.0 - rho) / (1.0 + rho);
  EXPECT_NEAR(ess(xs), expect, 0.15 * expect);
}

TEST(Ess, ConstantSeriesIsN) {
  std::vector<double> xs(50, 3.0);
  EXPECT_DOUBLE_EQ(ess(xs), 50.0);
}

TEST(Ess, ShortSeriesThrows) {
  EXPECT_THROW(ess(std::vector<double>(9, 1.0)), PreconditionViolation);
}

TEST(Lppd, SingleSampleSumsLogDensities) {
  auto m = igmm({0.0});
  Trace t = reals({1.5, 0.0});
  double expect = 2.0 * (-kLogRoot2Pi) + (-kLogRoot2Pi - 0.5);
  EXPECT_NEAR(lppd({t}, *m, {0.0, 0.0, 1.0}), expect, 1e-12);
}

TEST(Lppd, DuplicatedSamplesUnchanged) {
  auto m = igmm({0.0});
  std::vector<Trace> a{reals({1.5, 0.3}), reals({2.5, -1.0, 1.0})};
  std::vector<Trace> b = a;
  b.insert(b.end(), a.begin(), a.end());
  EXPECT_NEAR(lppd(a, *m, {0.1, -0.4}), lppd(b, *m, {0.1, -0.4}), 1e-12);
}

TEST(Lppd, UnsupportedModelThrows) {
  EXPECT_THROW(lppd({reals({0.0})}, *conjugate_normal(2.0), {1.0}), Error);
}

TEST(Ks, ExactQuantilesHaveSmallStatistic) {
  std::vector<double> xs;
  const int n = 1000;
  for (int i = 0; i < n; ++i) xs.push_back(-3.0 + 6.0 * (i + 0.5) / n);
  auto uniform_cdf = [](double x) { return std::clamp((x + 3.0) / 6.0, 0.0, 1.0); };
  EXPECT_NEAR(ks_statistic(xs, uniform_cdf), 0.5 / n, 1e-12);
}

TEST(Ks, NormalCdf) {
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(normal_cdf(1.0, 1.0, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
}
