#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "npimcmc/chain.hpp"
#include "npimcmc/engine.hpp"
#include "npimcmc/models.hpp"

using namespace npimcmc;

namespace {

const double kLogRoot2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

Trace reals(std::initializer_list<double> xs) {
  Trace t;
  for (double x : xs) t.push_back(make_real(x));
  return t;
}

ScriptedStream& script(StepStreams& st, Purpose p) {
  st.override_stream(p, std::make_unique<ScriptedStream>());
  return static_cast<ScriptedStream&>(st.get(p));
}

double igmm_log_lik(const std::vector<double>& data, const std::vector<double>& means) {
  double total = 0.0;
  for (double d : data) {
    double p = 0.0;
    for (double mu : means) p += std::exp(-0.5 * (d - mu) * (d - mu) - kLogRoot2Pi);
    total += std::log(p / double(means.size()));
  }
  return total;
}

// U(q) = q^2/2 + (q - 2)^2/2 for conjugate_normal(2.0), up to a constant.
double conj_U(double q) { return 0.5 * q * q + 0.5 * (q - 2.0) * (q - 2.0); }

}  // namespace

TEST(CoreStep, IgmmWalkthrough) {
  const auto& data = default_igmm_data().data;
  auto m = igmm(data);
  Trace t0 = reals({3.4, -1.2, 1.0, 0.5});
  StepStreams st(0, 0, 0);
  script(st, Purpose::aux).normals = {4.3, -3.4, -0.1, 1.4};
  script(st, Purpose::extend_x).normals = {-0.7};
  script(st, Purpose::extend_v).normals = {-0.3};
  script(st, Purpose::uniform).uniforms = {1e-300};
  SamplerConfig cfg;
  auto out = npimcmc_step(*m, *gaussian_iid_kernel(), *swap_involution<double>(), t0, st, cfg);
  EXPECT_EQ(out.extensions, 1u);
  EXPECT_EQ(out.proposal_dim, 5u);
  ASSERT_TRUE(out.accepted);
  EXPECT_EQ(out.next, reals({4.3, -3.4, -0.1, 1.4, -0.3}));

  RealVector x{4.3, -3.4, -0.1, 1.4, -0.3}, v{3.4, -1.2, 1.0, 0.5, -0.7};
  RealVector x0 = v, v0 = x;
  double expect = igmm_log_lik(data, {-3.4, -0.1, 1.4, -0.3}) + gaussian_log_density(x) +
                  gaussian_log_density(v) -
                  (igmm_log_lik(data, {-1.2, 1.0, 0.5}) + gaussian_log_density(x0) +
                   gaussian_log_density(v0));
  EXPECT_NEAR(out.log_ratio, expect, 1e-9);
}

TEST(CoreStep, RejectionReturnsUnextendedTrace) {
  auto m = igmm(default_igmm_data().data);
  Trace t0 = reals({3.4, -1.2, 1.0, 0.5});
  StepStreams st(0, 0, 0);
  script(st, Purpose::aux).normals = {4.3, -3.4, -0.1, 1.4};
  script(st, Purpose::extend_x).normals = {-0.7};
  script(st, Purpose::extend_v).normals = {-0.3};
  script(st, Purpose::uniform).uniforms = {1.0 - 1e-16};
  SamplerConfig cfg;
  auto out = npimcmc_step(*m, *gaussian_iid_kernel(), *swap_involution<double>(), t0, st, cfg);
  if (!out.accepted) EXPECT_EQ(out.next, t0);
}

TEST(CoreStep, SelfInverseStateHasRatioZero) {
  auto m = conjugate_normal(2.0);
  StepStreams st(0, 0, 0);
  script(st, Purpose::aux).normals = {0.8};
  SamplerConfig cfg;
  auto out = npimcmc_step(*m, *gaussian_iid_kernel(), *swap_involution<double>(), reals({0.8}), st,
                          cfg);
  EXPECT_NEAR(out.log_ratio, 0.0, 1e-15);
  EXPECT_TRUE(out.accepted);
}

TEST(CoreStep, FixedDimensionNeverExtends) {
  auto m = conjugate_normal(2.0);
  SamplerConfig cfg;
  for (std::uint64_t i = 0; i < 200; ++i) {
    StepStreams st(3, 0, i);
    auto out = npimcmc_step(*m, *gaussian_rw_kernel(), *swap_involution<double>(), reals({0.5}),
                            st, cfg);
    EXPECT_EQ(out.extensions, 0u);
    EXPECT_EQ(out.proposal_dim, 1u);
  }
}

TEST(CoreStep, FixedDimensionIsPlainMh) {
  auto m = conjugate_normal(2.0);
  SamplerConfig cfg;
  for (std::uint64_t i = 0; i < 50; ++i) {
    double q0 = 0.3 * double(i % 7) - 0.5;
    StepStreams st(5, 0, i);
    double v0 = q0 + CounterStream(stream_id(5, 0, Purpose::aux, i)).normal();
    auto out = npimcmc_step(*m, *gaussian_rw_kernel(), *swap_involution<double>(), reals({q0}), st,
                            cfg);
    EXPECT_NEAR(out.log_ratio, conj_U(q0) - conj_U(v0), 1e-12);
  }
}

TEST(CoreStep, OutOfSupportStartThrows) {
  StepStreams st(0, 0, 0);
  SamplerConfig cfg;
  EXPECT_THROW(npimcmc_step(*conjugate_normal(2.0), *gaussian_iid_kernel(),
                            *swap_involution<double>(), reals({0.1, 0.2}), st, cfg),
               InitialTraceOutOfSupport);
}

TEST(CoreStep, DimensionCap) {
  // Terminates on negative first draws and never on the others.
  auto m = make_program_model("runaway", false, [](auto& t) {
    auto x = t.sample_real();
    if (primal(x) >= 0.0)
      while (true) t.sample_real();
    return 0.0;
  });
  SamplerConfig cfg;
  cfg.dim_cap = 20;
  StepStreams st(0, 0, 0);
  script(st, Purpose::aux).normals = {5.0};
  EXPECT_THROW(npimcmc_step(*m, *gaussian_iid_kernel(), *swap_involution<double>(), reals({-1.0}),
                            st, cfg),
               DimensionCapExceeded);
}

TEST(HybridStep, GeometricPairsTails) {
  CounterStream pairing(1);
  auto x0 = engine::lift<EntropyPair>(Trace{make_bool(false)}, pairing);
  ASSERT_EQ(x0.size(), 1u);
  EXPECT_FALSE(x0[0].a);
  auto inst = find_supported_instance(*geometric(), x0);
  ASSERT_TRUE(inst.has_value());
  EXPECT_EQ(inst->trace, Trace{make_bool(false)});
}

TEST(HybridStep, MatchesCoreOnRealOnlyModel) {
  auto m = igmm(default_igmm_data().data);
  auto swap_r = swap_involution<double>();
  auto swap_e = swap_involution<EntropyPair>();
  auto kr = gaussian_rw_kernel(0.5);
  auto ke = entropy_lift(kr);
  SamplerConfig cfg;
  Trace t = reals({2.3, -2.0, 2.1});
  for (std::uint64_t i = 0; i < 300; ++i) {
    StepStreams a(9, 0, i), b(9, 0, i);
    auto ra = npimcmc_step(*m, *kr, *swap_r, t, a, cfg);
    auto rb = hybrid_npimcmc_step(*m, *ke, *swap_e, t, b, cfg);
    ASSERT_EQ(ra.halted, rb.halted);
    if (!ra.halted) EXPECT_NEAR(ra.log_ratio, rb.log_ratio, 1e-9);
    EXPECT_EQ(ra.accepted, rb.accepted);
    EXPECT_EQ(ra.next, rb.next);
    t = ra.next;
  }
}

TEST(MultistepStep, SingleUpdateMatchesCore) {
  auto m = igmm(default_igmm_data().data);
  auto swap = swap_involution<double>();
  auto k = gaussian_rw_kernel(0.5);
  SamplerConfig cfg;
  Trace t = reals({2.3, -2.0, 2.1});
  for (std::uint64_t i = 0; i < 300; ++i) {
    StepStreams a(4, 0, i), b(4, 0, i);
    auto ra = npimcmc_step(*m, *k, *swap, t, a, cfg);
    auto rb = multistep_npimcmc_step(*m, *k, {swap}, t, b, cfg);
    if (!ra.halted) EXPECT_NEAR(ra.log_ratio, rb.log_ratio, 1e-9);
    EXPECT_EQ(ra.next, rb.next);
    t = ra.next;
  }
}

TEST(MultistepStep, NoExtensionFollowsLeapfrogOrbit) {
  auto m = conjugate_normal(2.0);
  LeapfrogStepSpec spec{3, 0.2, m};
  std::vector<BijectionPtr<double>> updates;
  for (std::size_t u = 1; u <= 9; ++u) updates.push_back(leapfrog_update_family(u, spec, true));
  StepStreams st(0, 0, 0);
  script(st, Purpose::aux).normals = {0.6};
  script(st, Purpose::uniform).uniforms = {0.5};
  SamplerConfig cfg;
  auto out = multistep_npimcmc_step(*m, *gaussian_iid_kernel(), updates, reals({0.1}), st, cfg);
  auto end = leapfrog_trajectory(spec, true)->apply(RealState{{0.1}, {0.6}});
  EXPECT_EQ(out.extensions, 0u);
  double h0 = conj_U(0.1) + 0.18, h1 = conj_U(end.x[0]) + 0.5 * end.v[0] * end.v[0];
  EXPECT_NEAR(out.log_ratio, h0 - h1, 1e-12);
}

TEST(MultistepStep, SlicesMatchFullRecompute) {
  auto m = igmm(default_igmm_data().data);
  SamplerConfig cfg;
  cfg.leapfrog_L = 4;
  cfg.epsilon = 0.15;
  cfg.verify_slices = true;
  auto s = np_hmc(m, cfg);
  auto r = run_chain(*s, reals({1.5, 0.2}), {200, 0, 8, 0});
  ASSERT_FALSE(r.error) << *r.error;
  EXPECT_GT(r.stats.slice_checks, 0u);
  EXPECT_LE(r.stats.max_slice_error, 1e-9);
}

TEST(Samplers, HmcRatioIsHamiltonianOnConjugate) {
  auto m = conjugate_normal(2.0);
  SamplerConfig cfg;
  cfg.leapfrog_L = 3;
  cfg.epsilon = 0.25;
  auto s = np_hmc(m, cfg);
  for (std::uint64_t i = 0; i < 20; ++i) {
    double q = -1.0 + 0.2 * double(i);
    StepStreams st(6, 0, i);
    ChainState cur = s->initial_state(reals({q}), st);
    auto p = s->propose(cur, st);
    double p0 = CounterStream(stream_id(6, 0, Purpose::aux, i)).normal();
    bool d0 = CounterStream(stream_id(6, 0, Purpose::direction, i)).coin();
    // Backward leapfrog equals forward leapfrog with the momentum negated.
    double qq = q, pp = d0 ? p0 : -p0;
    for (int l = 0; l < 3; ++l) {
      pp -= 0.125 * (2.0 * qq - 2.0);
      qq += 0.25 * pp;
      pp -= 0.125 * (2.0 * qq - 2.0);
    }
    EXPECT_NEAR(p.log_ratio, conj_U(q) + 0.5 * p0 * p0 - conj_U(qq) - 0.5 * pp * pp, 1e-12);
    EXPECT_NEAR(as_real(p.on_accept.trace[0]), qq, 1e-12);
  }
}

TEST(Samplers, RejectHybridForHmc) {
  SamplerConfig cfg;
  cfg.space = SpaceKind::hybrid;
  EXPECT_THROW(np_hmc(conjugate_normal(2.0), cfg), ConfigError);
  EXPECT_THROW(np_hmc(geometric(), SamplerConfig{}), GradientUnsupported);
  cfg.space = SpaceKind::automatic;
  cfg.epsilon = -1.0;
  EXPECT_THROW(np_hmc_persistent(conjugate_normal(2.0), cfg), ConfigError);
  SamplerConfig bad_alpha;
  bad_alpha.alpha = 1.5;
  EXPECT_THROW(np_mh(conjugate_normal(2.0), bad_alpha), ConfigError);
  EXPECT_THROW(make_sampler("gibbs", conjugate_normal(2.0), SamplerConfig{}), ConfigError);
}

TEST(Samplers, PersistentFlipLaw) {
  SamplerConfig cfg;
  cfg.alpha = 0.5;
  cfg.leapfrog_L = 3;
  cfg.epsilon = 0.3;
  for (const auto& s : {np_mh_persistent(geometric(), cfg), np_mh_persistent(igmm({0.0, 1.0}), cfg),
                        np_hmc_persistent(geometric_real(), cfg),
                        np_lookahead_hmc(igmm({0.0, 1.0}), cfg)}) {
    Trace init = default_initial_trace(s->model(), 2, 0);
    auto r = run_chain(*s, init, {2000, 0, 2, 0});
    ASSERT_FALSE(r.error) << *r.error;
    EXPECT_TRUE(r.stats.flips_match_rejections) << s->name();
    EXPECT_EQ(r.stats.flips, r.stats.steps - r.stats.accepted) << s->name();
  }
}

TEST(Samplers, LookaheadZeroMatchesPersistentHmc) {
  auto m = igmm(default_igmm_data().data);
  SamplerConfig cfg;
  cfg.alpha = 0.7;
  cfg.leapfrog_L = 3;
  cfg.epsilon = 0.2;
  auto la = np_lookahead_hmc(m, cfg);
  auto hp = np_hmc_persistent(m, cfg);
  Trace init = reals({2.4, -2.0, 2.0});
  StepStreams i1(1, 0, ~0ull), i2(1, 0, ~0ull);
  ChainState a = la->initial_state(init, i1), b = hp->initial_state(init, i2);
  for (std::uint64_t i = 0; i < 300; ++i) {
    StepStreams s1(1, 0, i), s2(1, 0, i);
    auto ra = la->step(a, s1);
    auto rb = hp->step(b, s2);
    EXPECT_EQ(ra.accepted, rb.accepted);
    if (!ra.halted) EXPECT_NEAR(ra.log_ratio, rb.log_ratio, 1e-9);
    ASSERT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.direction, b.direction);
  }
}

TEST(Samplers, LookaheadGivesExtraChances) {
  auto m = conjugate_normal(2.0);
  SamplerConfig cfg;
  cfg.alpha = 0.5;
  cfg.leapfrog_L = 2;
  cfg.epsilon = 0.9;
  cfg.lookahead_K = 2;
  SamplerConfig base = cfg;
  base.lookahead_K = 0;
  auto la = run_chain(*np_lookahead_hmc(m, cfg), reals({1.0}), {3000, 0, 4, 0});
  auto hp = run_chain(*np_hmc_persistent(m, base), reals({1.0}), {3000, 0, 4, 0});
  EXPECT_GE(la.stats.acceptance_rate, hp.stats.acceptance_rate);
}

TEST(Samplers, MixtureSingletonMatchesMember) {
  auto m = igmm({0.0, 1.0});
  SamplerConfig cfg;
  auto member = np_mh(m, cfg);
  auto mix = mixture_wrap({member}, uniform_mixture(1));
  Trace t = reals({1.5, 0.3});
  ChainState a{t, true, {}}, b{t, true, {}};
  for (std::uint64_t i = 0; i < 200; ++i) {
    StepStreams s1(2, 0, i), s2(2, 0, i);
    auto ra = member->step(a, s1);
    auto rb = mix->step(b, s2);
    EXPECT_EQ(ra.accepted, rb.accepted);
    if (!ra.halted) EXPECT_NEAR(ra.log_ratio, rb.log_ratio, 1e-12);
    ASSERT_EQ(a.trace, b.trace);
  }
}

TEST(Samplers, MixtureOfMhAndPersistentHmcRuns) {
  auto m = igmm({0.0, 1.0});
  SamplerConfig cfg;
  cfg.alpha = 0.5;
  auto mix = mixture_wrap({np_mh(m, cfg), np_hmc_persistent(m, cfg)}, uniform_mixture(2));
  auto r = run_chain(*mix, reals({1.5, 0.3}), {500, 0, 1, 0});
  EXPECT_FALSE(r.error) << *r.error;
  EXPECT_GT(r.stats.accepted, 0u);
}

TEST(Samplers, StateDependentMixtureWeightsEnterRatio) {
  auto m = conjugate_normal(2.0);
  SamplerConfig cfg;
  auto a = np_mh(m, cfg);
  MixtureKernel k{[](const Trace& t) {
    double p = as_real(t[0]) > 0 ? 0.8 : 0.2;
    return std::vector<double>{p, 1.0 - p};
  }};
  auto mix = mixture_wrap({a, a}, k);
  for (std::uint64_t i = 0; i < 50; ++i) {
    StepStreams s1(3, 0, i), s2(3, 0, i);
    ChainState cur{reals({0.4}), true, {}};
    auto pm = mix->propose(cur, s1);
    auto pa = a->propose(cur, s2);
    double u = CounterStream(stream_id(3, 0, Purpose::mix, i)).uniform();
    std::size_t idx = u < 0.8 ? 0 : 1;
    double q = as_real(pa.on_accept.trace[0]);
    double back = q > 0 ? (idx == 0 ? 0.8 : 0.2) : (idx == 0 ? 0.2 : 0.8);
    double fwd = idx == 0 ? 0.8 : 0.2;
    EXPECT_NEAR(pm.log_ratio, pa.log_ratio + std::log(back) - std::log(fwd), 1e-12);
  }
}

TEST(Chain, ZeroSamples) {
  auto r = run_chain(*np_mh(geometric(), SamplerConfig{}), {make_bool(false)}, {0, 0, 1, 0});
  EXPECT_TRUE(r.samples.empty());
  EXPECT_EQ(r.stats.steps, 0u);
  EXPECT_EQ(r.stats.acceptance_rate, 0.0);
}

TEST(Chain, Deterministic) {
  auto s = np_mh(igmm(default_igmm_data().data), SamplerConfig{});
  Trace init = default_initial_trace(s->model(), 5, 0);
  auto a = run_chain(*s, init, {300, 10, 5, 0});
  auto b = run_chain(*s, init, {300, 10, 5, 0});
  EXPECT_EQ(a.samples, b.samples);
  auto c = run_chain(*s, init, {300, 10, 6, 0});
  EXPECT_NE(a.samples, c.samples);
}

TEST(Chain, OutOfSupportInitIsReported) {
  auto r = run_chain(*np_mh(geometric(), SamplerConfig{}), {make_real(0.0)}, {10, 0, 1, 0});
  ASSERT_TRUE(r.error.has_value());
  EXPECT_TRUE(r.samples.empty());
}

TEST(Chain, GeometricPmf) {
  auto s = np_mh(geometric(), SamplerConfig{});
  auto r = run_chain(*s, {make_bool(false)}, {10000, 1000, 1, 0});
  ASSERT_FALSE(r.error);
  std::vector<double> counts(4, 0.0);
  for (const auto& t : r.samples) {
    auto k = static_cast<std::size_t>(return_value(s->model(), t));
    if (k < counts.size()) counts[k] += 1.0;
  }
  for (std::size_t k = 0; k < counts.size(); ++k)
    EXPECT_NEAR(counts[k] / 10000.0, std::pow(0.5, double(k + 1)), 0.05);
}
