#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "npimcmc/models.hpp"
#include "npimcmc/rng.hpp"

using namespace npimcmc;

namespace {

const double kLogRoot2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

std::vector<ModelPtr> builtin_models() {
  return {geometric(), geometric_real(), igmm(default_igmm_data().data), random_walk(1.1),
          conjugate_normal(2.0)};
}

EntropyVector random_entropy(Stream& s, std::size_t n) {
  EntropyVector x;
  for (std::size_t i = 0; i < n; ++i) x.emplace_back(s.normal() * 2.0, s.coin());
  return x;
}

}  // namespace

TEST(Density, GeometricStopsOnFirstF) {
  EXPECT_DOUBLE_EQ(density(*geometric(), {make_bool(false)}), 0.0);
}

TEST(Density, GeometricNeedsThirdValue) {
  EXPECT_EQ(density(*geometric(), {make_bool(true), make_real(0.5)}), -INFINITY);
}

TEST(Density, GeometricReturnValueCountsHeads) {
  Trace t{make_bool(true), make_real(0.1), make_bool(true), make_real(-2.0), make_bool(false)};
  EXPECT_DOUBLE_EQ(density(*geometric(), t), 0.0);
  EXPECT_DOUBLE_EQ(return_value(*geometric(), t), 2.0);
}

TEST(Density, ConjugateClosedForm) {
  EXPECT_NEAR(density(*conjugate_normal(2.0), {make_real(0.0)}), -kLogRoot2Pi - 2.0, 1e-14);
}

TEST(Density, WrongValueTypeRejects) {
  EXPECT_EQ(density(*geometric(), {make_real(0.3)}), -INFINITY);
  EXPECT_EQ(density(*conjugate_normal(2.0), {make_bool(true)}), -INFINITY);
}

TEST(Density, TrailingValuesLoseSupport) {
  EXPECT_EQ(density(*conjugate_normal(2.0), {make_real(0.0), make_real(1.0)}), -INFINITY);
  EXPECT_EQ(density(*geometric(), {make_bool(false), make_bool(false)}), -INFINITY);
}

TEST(Density, IgmmMatchesMixtureFormula) {
  std::vector<double> data{-1.0, 0.3, 2.0};
  auto m = igmm(data);
  Trace t{make_real(3.4), make_real(-1.2), make_real(1.0), make_real(0.5)};
  double expect = 0.0;
  for (double d : data) {
    double p = 0.0;
    for (double mu : {-1.2, 1.0, 0.5})
      p += std::exp(-0.5 * (d - mu) * (d - mu) - kLogRoot2Pi) / 3.0;
    expect += std::log(p);
  }
  EXPECT_NEAR(density(*m, t), expect, 1e-12);
  EXPECT_EQ(density(*m, {make_real(0.7)}), -INFINITY);  // K = 0
  EXPECT_EQ(density(*m, {make_real(2.0), make_real(0.0)}), -INFINITY);
}

TEST(Density, ScoreRejectsNonPositiveWeights) {
  auto m = make_program_model("zero_score", false, [](auto& t) {
    t.score(0.0);
    return 0.0;
  });
  EXPECT_EQ(density(*m, {}), -INFINITY);
}

TEST(Instance, IgmmWalkthrough) {
  EntropyVector x{EntropyPair(3.4, true), EntropyPair(-1.2, false), EntropyPair(1.0, true),
                  EntropyPair(0.5, false)};
  auto inst = find_supported_instance(*igmm(default_igmm_data().data), x);
  ASSERT_TRUE(inst.has_value());
  EXPECT_EQ(inst->k, 4u);
  EXPECT_EQ(inst->trace,
            (Trace{make_real(3.4), make_real(-1.2), make_real(1.0), make_real(0.5)}));
}

TEST(Instance, GeometricTails) {
  auto inst = find_supported_instance(*geometric(), {EntropyPair(0.7, false)});
  ASSERT_TRUE(inst.has_value());
  EXPECT_EQ(inst->k, 1u);
  EXPECT_EQ(inst->trace, Trace{make_bool(false)});
}

TEST(Instance, GeometricHeadsNeedsMore) {
  auto s = search_instance(*geometric(), EntropyVector{EntropyPair(0.7, true)});
  EXPECT_EQ(s.status, SearchStatus::needs_more);
  EXPECT_FALSE(find_supported_instance(*geometric(), {EntropyPair(0.7, true)}).has_value());
}

TEST(Instance, RealSearchRejectsOnBoolRequest) {
  auto s = search_instance(*geometric(), RealVector{0.3});
  EXPECT_EQ(s.status, SearchStatus::rejected);
}

TEST(Instance, UniqueAndConsistentOnRandomEntropy) {
  for (const auto& m : builtin_models()) {
    for (std::uint64_t i = 0; i < 1000; ++i) {
      CounterStream s(stream_id(17, i, Purpose::init, 0));
      auto x = random_entropy(s, 1 + i % 12);
      auto inst = find_supported_instance(*m, x);
      if (!inst) continue;
      EXPECT_LE(inst->k, x.size());
      EXPECT_EQ(density(*m, inst->trace), inst->log_weight) << m->name();
      // Any other prefix is unsupported.
      for (std::size_t len = 0; len <= x.size(); ++len) {
        if (len == inst->k) continue;
        EntropyVector pre(x.begin(), x.begin() + len);
        auto other = search_instance(*m, pre);
        if (len < inst->k) {
          EXPECT_NE(other.status, SearchStatus::found) << m->name() << " len " << len;
        } else {
          // Longer vectors contain the same instance; their full trace is not supported.
          ASSERT_EQ(other.status, SearchStatus::found);
          EXPECT_EQ(other.instance.k, inst->k);
          Trace full = inst->trace;
          for (std::size_t j = inst->k; j < len; ++j) full.push_back(make_real(pre[j].r));
          EXPECT_EQ(density(*m, full), -INFINITY) << m->name() << " len " << len;
        }
      }
    }
  }
}

TEST(Instance, PriorDrawsArePaddedConsistently) {
  for (const auto& m : builtin_models()) {
    for (std::uint64_t i = 0; i < 200; ++i) {
      CounterStream s(stream_id(23, i, Purpose::init, 0));
      auto t = sample_prior(*m, s, 500);
      if (!t) continue;
      CounterStream pad(i);
      auto x = pair_trace(*t, RealVector(t->size(), 0.25), std::vector<bool>(t->size(), true));
      auto tail = random_entropy(pad, 3);
      x.insert(x.end(), tail.begin(), tail.end());
      auto inst = find_supported_instance(*m, x);
      ASSERT_TRUE(inst.has_value()) << m->name();
      EXPECT_EQ(inst->trace, *t);
    }
  }
}

TEST(Prefix, GeometricProbesHaveNoViolations) {
  auto r = check_prefix_property(
      *geometric(), {{make_bool(false)}, {make_bool(true), make_real(0.1), make_bool(false)}});
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.probes, 2u);
}

TEST(Prefix, BrokenFixtureIsCaught) {
  auto r = check_prefix_property(*broken_prefix_fixture(), {{make_real(0.1), make_real(0.2)}});
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].supported_lengths, (std::vector<std::size_t>{1, 2}));
}

TEST(Prefix, EmptyProbeSet) {
  auto r = check_prefix_property(*geometric(), {});
  EXPECT_EQ(r.probes, 0u);
  EXPECT_TRUE(r.ok());
}

TEST(Prefix, HoldsOnThousandSeededTracesPerModel) {
  for (const auto& m : builtin_models()) {
    std::vector<Trace> probes;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      CounterStream s(stream_id(31, i, Purpose::init, 0));
      Trace t;
      if (auto prior = sample_prior(*m, s, 300)) t = *prior;
      for (int j = 0; j < 3; ++j)
        t.push_back(m->has_coins() && s.coin() ? make_bool(s.coin()) : make_real(s.normal()));
      probes.push_back(std::move(t));
    }
    EXPECT_TRUE(check_prefix_property(*m, probes).ok()) << m->name();
  }
}

TEST(Prior, DrawsAreSupported) {
  for (const auto& m : builtin_models()) {
    CounterStream s(99);
    Trace t = draw_initial_trace(*m, s);
    EXPECT_TRUE(std::isfinite(density(*m, t))) << m->name();
  }
}

TEST(Prior, GeometricReturnValueHasGeometricLaw) {
  CounterStream s(4);
  const int n = 40000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < n; ++i) {
    auto k = static_cast<std::size_t>(return_value(*geometric(), *sample_prior(*geometric(), s)));
    if (k < counts.size()) ++counts[k];
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    double p = std::pow(0.5, double(k + 1));
    EXPECT_NEAR(counts[k] / double(n), p, 4.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(RandomWalk, InvalidConstantsThrow) {
  EXPECT_THROW(random_walk(1.0, 0.0), PreconditionViolation);
  EXPECT_THROW(random_walk(1.0, 0.1, -1.0), PreconditionViolation);
}

TEST(RandomWalk, ReturnsDistanceTravelled) {
  auto m = random_walk(3.0, 0.1, 1.0);
  Trace t{make_real(0.5), make_real(-0.2), make_real(0.9)};
  EXPECT_NEAR(return_value(*m, t), 1.6, 1e-15);
  EXPECT_EQ(density(*m, {make_real(0.5), make_real(-0.2)}), -INFINITY);
}

TEST(MixtureData, IsSeededAndRoundRobin) {
  auto a = make_mixture_data({-5.0, 5.0}, 6, 1);
  auto b = make_mixture_data({-5.0, 5.0}, 6, 1);
  EXPECT_EQ(a.data, b.data);
  ASSERT_EQ(a.data.size(), 6u);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    EXPECT_LT(std::abs(a.data[i] - a.means[i % 2]), 5.0);
}

TEST(Lppd, IgmmSingleComponentAtZero) {
  auto m = igmm({0.0});
  Trace t{make_real(1.5), make_real(0.0)};
  EXPECT_NEAR(m->predictive_log_density(t, 0.0), -kLogRoot2Pi, 1e-14);
}
