#include "npimcmc/sampler.hpp"

#include <array>
#include <cmath>

#include "npimcmc/engine.hpp"

namespace npimcmc {

void SamplerConfig::validate(bool uses_leapfrog) const {
  if (dim_cap < 1) throw ConfigError("dim_cap must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(proposal_scale > 0.0) || !std::isfinite(proposal_scale))
    throw ConfigError("proposal_scale must be finite and positive");
  if (uses_leapfrog) {
    if (leapfrog_L < 1) throw ConfigError("leapfrog_L must be at least 1");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw ConfigError("epsilon must be finite and positive");
  }
}

namespace {

template <class T>
struct RawProposal {
  std::optional<Instance> instance;
  double log_ratio = -INFINITY;
  State<T> final;
  std::size_t extensions = 0;
  std::size_t slice_checks = 0;
  double max_slice_error = 0.0;
};

// Core step up to the accept test. The current and proposal sides may use
// different kernels (persistent MH).
template <class T>
RawProposal<T> core_propose(const Model& m, const AuxKernel<T>& aux_cur,
                            const AuxKernel<T>& aux_prop, const Bijection<T>& inv,
                            const Trace& t0, StepStreams& st, const SamplerConfig& cfg) {
  if (!inv.is_involutive())
    throw PreconditionViolation("npimcmc step: '" + inv.name() + "' is not an involution");
  Instance i0 = engine::initial_instance(m, t0);
  State<T> s0;
  s0.x = engine::lift<T>(t0, st.get(Purpose::pairing));
  s0.v = aux_cur.sample(st.get(Purpose::aux), s0.x);
  auto r = engine::core_extend(m, inv, std::move(s0), st.get(Purpose::extend_x),
                               st.get(Purpose::extend_v), cfg.dim_cap);
  RawProposal<T> out;
  out.extensions = r.extensions;
  if (!r.proposal) return out;
  out.log_ratio = engine::log_side(r.proposal->log_weight, aux_prop, r.final, r.proposal->k) -
                  engine::log_side(i0.log_weight, aux_cur, r.initial, i0.k) +
                  inv.log_abs_det_jac(r.initial);
  out.instance = std::move(r.proposal);
  out.final = std::move(r.final);
  return out;
}

// Multiple-step proposal from a prepared initial state.
template <class T>
RawProposal<T> multistep_propose(const Model& m, const AuxKernel<T>& aux_cur,
                                 const AuxKernel<T>& aux_prop,
                                 const typename engine::MultistepRun<T>::UpdateAt& update_at,
                                 std::size_t n_updates, const Instance& i0, State<T> s0,
                                 StepStreams& st, const SamplerConfig& cfg, bool verify) {
  engine::MultistepRun<T> run(m, std::move(s0), st.get(Purpose::extend_x),
                              st.get(Purpose::extend_v), cfg.dim_cap, verify);
  bool ok = run.advance(update_at, n_updates);
  RawProposal<T> out;
  out.extensions = run.extensions();
  out.slice_checks = run.slice_checks();
  out.max_slice_error = run.max_slice_error();
  if (!ok) return out;
  const auto& states = run.states();
  out.instance = run.last_instance();
  out.log_ratio =
      engine::log_side(out.instance->log_weight, aux_prop, states.back(), out.instance->k) -
      engine::log_side(i0.log_weight, aux_cur, states.front(), i0.k) + run.log_det_sum(update_at);
  out.final = states.back();
  return out;
}

template <class T>
StepOutcome to_outcome(RawProposal<T>&& p, const Trace& t0, StepStreams& st) {
  StepOutcome out;
  out.extensions = p.extensions;
  out.slice_checks = p.slice_checks;
  out.max_slice_error = p.max_slice_error;
  out.log_ratio = p.log_ratio;
  out.next = t0;
  if (!p.instance) {
    out.halted = true;
    return out;
  }
  out.proposal_dim = p.instance->k;
  out.accepted = engine::accept(p.log_ratio, st.get(Purpose::uniform));
  if (out.accepted) out.next = std::move(p.instance->trace);
  return out;
}

template <class T>
StepOutcome multistep_step(const Model& m, const AuxKernel<T>& aux,
                           const std::vector<BijectionPtr<T>>& updates, const Trace& t0,
                           StepStreams& st, const SamplerConfig& cfg, bool verify) {
  if (updates.empty()) throw PreconditionViolation("multistep step: no updates");
  Instance i0 = engine::initial_instance(m, t0);
  State<T> s0;
  s0.x = engine::lift<T>(t0, st.get(Purpose::pairing));
  s0.v = aux.sample(st.get(Purpose::aux), s0.x);
  auto update_at = [&](std::size_t l) -> const Bijection<T>& { return *updates[l - 1]; };
  return to_outcome(
      multistep_propose<T>(m, aux, aux, update_at, updates.size(), i0, std::move(s0), st, cfg,
                           verify),
      t0, st);
}

bool use_hybrid(const Model& m, SpaceKind k) {
  if (k == SpaceKind::automatic) return m.has_coins();
  return k == SpaceKind::hybrid;
}

}  // namespace

StepOutcome npimcmc_step(const Model& m, const AuxKernel<double>& aux, const Bijection<double>& inv,
                         const Trace& t0, StepStreams& streams, const SamplerConfig& cfg) {
  return to_outcome(core_propose<double>(m, aux, aux, inv, t0, streams, cfg), t0, streams);
}

StepOutcome hybrid_npimcmc_step(const Model& m, const AuxKernel<EntropyPair>& aux,
                                const Bijection<EntropyPair>& inv, const Trace& t0,
                                StepStreams& streams, const SamplerConfig& cfg) {
  return to_outcome(core_propose<EntropyPair>(m, aux, aux, inv, t0, streams, cfg), t0, streams);
}

StepOutcome multistep_npimcmc_step(const Model& m, const AuxKernel<double>& aux,
                                   const std::vector<BijectionPtr<double>>& updates,
                                   const Trace& t0, StepStreams& streams,
                                   const SamplerConfig& cfg, bool verify_slices) {
  return multistep_step<double>(m, aux, updates, t0, streams, cfg, verify_slices);
}

StepOutcome multistep_npimcmc_step(const Model& m, const AuxKernel<EntropyPair>& aux,
                                   const std::vector<BijectionPtr<EntropyPair>>& updates,
                                   const Trace& t0, StepStreams& streams,
                                   const SamplerConfig& cfg, bool verify_slices) {
  return multistep_step<EntropyPair>(m, aux, updates, t0, streams, cfg, verify_slices);
}

// ---------------------------------------------------------------------------

ChainState Sampler::initial_state(const Trace& t, StepStreams&) const {
  return ChainState{t, true, {}};
}

StepInfo Sampler::finish(ChainState& cur, Proposal&& p, bool accepted) const {
  StepInfo info;
  info.accepted = accepted;
  info.log_ratio = p.log_ratio;
  info.extensions = p.extensions;
  info.proposal_dim = p.proposal_dim;
  info.halted = p.halted;
  info.slice_checks = p.slice_checks;
  info.max_slice_error = p.max_slice_error;
  ChainState& next = accepted ? p.on_accept : p.on_reject;
  if (accepted && !std::isfinite(density(*model_, next.trace)))
    throw Error("accepted trace is outside the support: " + to_string(next.trace));
  info.direction_flipped = next.direction != cur.direction;
  cur = std::move(next);
  return info;
}

StepInfo Sampler::step(ChainState& cur, StepStreams& streams) const {
  Proposal p = propose(cur, streams);
  bool accepted = !p.halted && engine::accept(p.log_ratio, streams.get(Purpose::uniform));
  return finish(cur, std::move(p), accepted);
}

namespace {

template <class T>
void fill(Proposal& out, RawProposal<T>& raw) {
  out.log_ratio = raw.log_ratio;
  out.extensions = raw.extensions;
  out.slice_checks = raw.slice_checks;
  out.max_slice_error = raw.max_slice_error;
  out.halted = !raw.instance;
  if (raw.instance) {
    out.proposal_dim = raw.instance->k;
    out.on_accept.trace = raw.instance->trace;
  }
}

template <class T>
KernelPtr<T> lift_kernel(KernelPtr<double> k);
template <>
KernelPtr<double> lift_kernel<double>(KernelPtr<double> k) {
  return k;
}
template <>
KernelPtr<EntropyPair> lift_kernel<EntropyPair>(KernelPtr<double> k) {
  return entropy_lift(std::move(k));
}

template <class T>
class NpMh final : public Sampler {
 public:
  NpMh(ModelPtr model, SamplerConfig cfg)
      : Sampler(std::move(model)),
        cfg_(cfg),
        kernel_(lift_kernel<T>(gaussian_rw_kernel(cfg.proposal_scale))),
        swap_(swap_involution<T>()) {}

  std::string name() const override { return "np_mh"; }

  Proposal propose(const ChainState& cur, StepStreams& st) const override {
    auto raw = core_propose<T>(*model_, *kernel_, *kernel_, *swap_, cur.trace, st, cfg_);
    Proposal out;
    fill(out, raw);
    out.on_reject = cur;
    out.on_accept.direction = cur.direction;
    return out;
  }

 private:
  SamplerConfig cfg_;
  KernelPtr<T> kernel_;
  BijectionPtr<T> swap_;
};

template <class T>
class NpMhPersistent final : public Sampler {
 public:
  NpMhPersistent(ModelPtr model, SamplerConfig cfg, Eta eta)
      : Sampler(std::move(model)), cfg_(cfg), swap_(swap_involution<T>()) {
    PartitionOptions opts;
    opts.scale = cfg.proposal_scale;
    auto k = partitioned_persistent_kernels(std::move(eta), opts);
    plus_ = lift_kernel<T>(k.plus);
    minus_ = lift_kernel<T>(k.minus);
  }

  std::string name() const override { return "np_mh_persistent"; }
  bool persistent() const override { return true; }

  Proposal propose(const ChainState& cur, StepStreams& st) const override {
    bool d0 = cur.direction;
    const auto& k_cur = d0 ? *plus_ : *minus_;
    const auto& k_prop = d0 ? *minus_ : *plus_;
    auto raw = core_propose<T>(*model_, k_cur, k_prop, *swap_, cur.trace, st, cfg_);
    Proposal out;
    fill(out, raw);
    out.on_accept.direction = d0;
    out.on_reject = cur;
    out.on_reject.direction = !d0;
    return out;
  }

 private:
  SamplerConfig cfg_;
  BijectionPtr<T> swap_;
  KernelPtr<T> plus_, minus_;
};

// Leapfrog update families for both directions, indexed by 1-based m.
class LeapfrogUpdates {
 public:
  LeapfrogUpdates(const ModelPtr& model, const SamplerConfig& cfg) {
    spec_ = LeapfrogStepSpec{cfg.leapfrog_L, cfg.epsilon, model};
    spec_.validate();
    if (model->has_coins())
      throw ConfigError("HMC samplers need a model whose traces are all real");
    for (int d = 0; d < 2; ++d)
      for (std::size_t m = 1; m <= 3 * cfg.leapfrog_L; ++m)
        updates_[d].push_back(leapfrog_update_family(m, spec_, d == 1));
  }
  std::size_t count() const { return 3 * spec_.L; }
  // Update for global index l, wrapping around every 3L updates.
  const Bijection<double>& at(bool direction, std::size_t l) const {
    return *updates_[direction ? 1 : 0][(l - 1) % count()];
  }

 private:
  LeapfrogStepSpec spec_;
  std::array<std::vector<BijectionPtr<double>>, 2> updates_;
};

class NpHmc final : public Sampler {
 public:
  NpHmc(ModelPtr model, SamplerConfig cfg)
      : Sampler(model), cfg_(cfg), updates_(model, cfg), iid_(gaussian_iid_kernel()) {}

  std::string name() const override { return "np_hmc"; }

  Proposal propose(const ChainState& cur, StepStreams& st) const override {
    bool d0 = st.get(Purpose::direction).coin();
    Proposal p = transition(cur.trace, d0, st);
    p.on_accept.direction = cur.direction;
    p.on_reject = cur;
    return p;
  }

  Proposal transition(const Trace& t0, bool d0, StepStreams& st) const {
    Instance i0 = engine::initial_instance(*model_, t0);
    RealState s0;
    s0.x = engine::lift<double>(t0, st.get(Purpose::pairing));
    s0.v = iid_->sample(st.get(Purpose::aux), s0.x);
    auto update_at = [&](std::size_t l) -> const Bijection<double>& { return updates_.at(d0, l); };
    auto raw = multistep_propose<double>(*model_, *iid_, *iid_, update_at, updates_.count(), i0,
                                         std::move(s0), st, cfg_, cfg_.verify_slices);
    Proposal out;
    fill(out, raw);
    out.on_reject.trace = t0;
    return out;
  }

 private:
  SamplerConfig cfg_;
  LeapfrogUpdates updates_;
  KernelPtr<double> iid_;
};

// Shared by the persistent-momentum samplers.
class MomentumSampler : public Sampler {
 public:
  MomentumSampler(ModelPtr model, SamplerConfig cfg)
      : Sampler(model), cfg_(cfg), updates_(model, cfg), iid_(gaussian_iid_kernel()) {}

  bool persistent() const override { return true; }

  ChainState initial_state(const Trace& t, StepStreams& st) const override {
    ChainState s{t, true, {}};
    for (std::size_t i = 0; i < t.size(); ++i) s.momentum.push_back(st.get(Purpose::aux).normal());
    return s;
  }

 protected:
  // u = sqrt(1 - alpha^2) v0 + alpha N(0, I)
  RealVector corrupt(const ChainState& cur, StepStreams& st) const {
    if (cur.momentum.size() != cur.trace.size())
      throw PreconditionViolation("momentum and trace dimensions differ");
    double keep = std::sqrt(1.0 - cfg_.alpha * cfg_.alpha);
    RealVector u(cur.momentum.size());
    Stream& s = st.get(Purpose::aux);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = keep * cur.momentum[i] + cfg_.alpha * s.normal();
    return u;
  }

  SamplerConfig cfg_;
  LeapfrogUpdates updates_;
  KernelPtr<double> iid_;
};

class NpHmcPersistent final : public MomentumSampler {
 public:
  using MomentumSampler::MomentumSampler;
  std::string name() const override { return "np_hmc_persistent"; }

  Proposal propose(const ChainState& cur, StepStreams& st) const override {
    bool d0 = cur.direction;
    Instance i0 = engine::initial_instance(*model_, cur.trace);
    RealState s0;
    s0.x = engine::lift<double>(cur.trace, st.get(Purpose::pairing));
    s0.v = corrupt(cur, st);
    RealVector u = s0.v;
    auto update_at = [&](std::size_t l) -> const Bijection<double>& { return updates_.at(d0, l); };
    auto raw = multistep_propose<double>(*model_, *iid_, *iid_, update_at, updates_.count(), i0,
                                         std::move(s0), st, cfg_, cfg_.verify_slices);
    Proposal out;
    fill(out, raw);
    if (raw.instance) {
      out.on_accept.direction = d0;
      out.on_accept.momentum.assign(raw.final.v.begin(), raw.final.v.begin() + raw.instance->k);
    }
    out.on_reject = ChainState{cur.trace, !d0, std::move(u)};
    return out;
  }
};

class NpLookaheadHmc final : public MomentumSampler {
 public:
  using MomentumSampler::MomentumSampler;
  std::string name() const override { return "np_lookahead_hmc"; }

  Proposal propose(const ChainState&, StepStreams&) const override {
    throw PreconditionViolation("np_lookahead_hmc decides inside step(); it cannot be a mixture member");
  }

  StepInfo step(ChainState& cur, StepStreams& st) const override {
    bool d0 = cur.direction;
    double log_u = std::log(st.get(Purpose::uniform).uniform());
    Instance i0 = engine::initial_instance(*model_, cur.trace);
    RealState s0;
    s0.x = engine::lift<double>(cur.trace, st.get(Purpose::pairing));
    s0.v = corrupt(cur, st);
    RealVector u = s0.v;
    auto update_at = [&](std::size_t l) -> const Bijection<double>& { return updates_.at(d0, l); };
    engine::MultistepRun<double> run(*model_, std::move(s0), st.get(Purpose::extend_x),
                                     st.get(Purpose::extend_v), cfg_.dim_cap, cfg_.verify_slices);
    Proposal p;
    p.on_reject = ChainState{cur.trace, !d0, u};
    bool accepted = false;
    for (std::size_t j = 1; j <= cfg_.lookahead_K + 1; ++j) {
      if (!run.advance(update_at, j * updates_.count())) {
        p.halted = true;
        break;
      }
      const auto& states = run.states();
      const Instance& inst = run.last_instance();
      double log_sigma = engine::log_side(inst.log_weight, *iid_, states.back(), inst.k) -
                         engine::log_side(i0.log_weight, *iid_, states.front(), i0.k) +
                         run.log_det_sum(update_at);
      p.log_ratio = log_sigma;
      p.proposal_dim = inst.k;
      if (log_u < log_sigma) {
        accepted = true;
        p.on_accept.trace = inst.trace;
        p.on_accept.direction = d0;
        p.on_accept.momentum.assign(states.back().v.begin(), states.back().v.begin() + inst.k);
        break;
      }
    }
    p.extensions = run.extensions();
    p.slice_checks = run.slice_checks();
    p.max_slice_error = run.max_slice_error();
    return finish(cur, std::move(p), accepted);
  }
};

class Mixture final : public Sampler {
 public:
  Mixture(std::vector<SamplerPtr> members, MixtureKernel kernel)
      : Sampler(members.empty() ? nullptr : members.front()->model_ptr()),
        members_(std::move(members)),
        kernel_(std::move(kernel)) {
    if (members_.empty()) throw ConfigError("mixture: no members");
    for (const auto& m : members_) {
      if (m->model_ptr() != model_) throw ConfigError("mixture: members must share the model");
      if (dynamic_cast<const MomentumSampler*>(m.get())) carries_momentum_ = true;
    }
  }

  std::string name() const override { return "mixture"; }

  ChainState initial_state(const Trace& t, StepStreams& st) const override {
    ChainState s = members_.front()->initial_state(t, st);
    if (s.momentum.empty())
      for (const auto& m : members_)
        if (dynamic_cast<const MomentumSampler*>(m.get())) {
          s = m->initial_state(t, st);
          break;
        }
    return s;
  }

  Proposal propose(const ChainState& cur, StepStreams& st) const override {
    std::vector<double> probs = kernel_.probs(cur.trace);
    if (probs.size() != members_.size()) throw PreconditionViolation("mixture: index out of family");
    double u = st.get(Purpose::mix).uniform();
    std::size_t m = 0;
    double acc = probs[0];
    while (u >= acc && m + 1 < probs.size()) acc += probs[++m];
    Proposal p = members_[m]->propose(cur, st);
    if (!p.halted) {
      std::vector<double> back = kernel_.probs(p.on_accept.trace);
      p.log_ratio += std::log(back.at(m)) - std::log(probs[m]);
    }
    if (carries_momentum_) {
      // Members without momentum leave it stale; redraw it from N(0, I),
      // its stationary law.
      for (ChainState* s : {&p.on_accept, &p.on_reject})
        if (s->momentum.size() != s->trace.size()) {
          s->momentum.clear();
          for (std::size_t i = 0; i < s->trace.size(); ++i)
            s->momentum.push_back(st.get(Purpose::mix).normal());
        }
    }
    return p;
  }

 private:
  std::vector<SamplerPtr> members_;
  MixtureKernel kernel_;
  bool carries_momentum_ = false;
};

}  // namespace

SamplerPtr np_mh(ModelPtr model, const SamplerConfig& cfg) {
  cfg.validate(false);
  if (use_hybrid(*model, cfg.space)) return std::make_shared<NpMh<EntropyPair>>(model, cfg);
  return std::make_shared<NpMh<double>>(model, cfg);
}

SamplerPtr np_mh_persistent(ModelPtr model, const SamplerConfig& cfg, Eta eta) {
  cfg.validate(false);
  if (use_hybrid(*model, cfg.space))
    return std::make_shared<NpMhPersistent<EntropyPair>>(model, cfg, std::move(eta));
  return std::make_shared<NpMhPersistent<double>>(model, cfg, std::move(eta));
}

namespace {
void require_real_space(const SamplerConfig& cfg) {
  cfg.validate(true);
  if (cfg.space == SpaceKind::hybrid) throw ConfigError("HMC samplers run on the real-only space");
}
}  // namespace

SamplerPtr np_hmc(ModelPtr model, const SamplerConfig& cfg) {
  require_real_space(cfg);
  return std::make_shared<NpHmc>(model, cfg);
}

SamplerPtr np_hmc_persistent(ModelPtr model, const SamplerConfig& cfg) {
  require_real_space(cfg);
  return std::make_shared<NpHmcPersistent>(model, cfg);
}

SamplerPtr np_lookahead_hmc(ModelPtr model, const SamplerConfig& cfg) {
  require_real_space(cfg);
  return std::make_shared<NpLookaheadHmc>(model, cfg);
}

Proposal np_hmc_transition(const Sampler& s, const Trace& t0, bool direction, StepStreams& streams) {
  const auto* hmc = dynamic_cast<const NpHmc*>(&s);
  if (!hmc) throw PreconditionViolation("np_hmc_transition: sampler is not np_hmc");
  return hmc->transition(t0, direction, streams);
}

MixtureKernel uniform_mixture(std::size_t n) {
  return MixtureKernel{[n](const Trace&) { return std::vector<double>(n, 1.0 / double(n)); }};
}

SamplerPtr mixture_wrap(std::vector<SamplerPtr> members, MixtureKernel kernel) {
  return std::make_shared<Mixture>(std::move(members), std::move(kernel));
}

const std::vector<std::string>& sampler_names() {
  static const std::vector<std::string> names = {"np_mh", "np_mh_persistent", "np_hmc",
                                                 "np_hmc_persistent", "np_lookahead_hmc"};
  return names;
}

SamplerPtr make_sampler(const std::string& name, ModelPtr model, const SamplerConfig& cfg) {
  if (name == "np_mh") return np_mh(model, cfg);
  if (name == "np_mh_persistent") return np_mh_persistent(model, cfg);
  if (name == "np_hmc") return np_hmc(model, cfg);
  if (name == "np_hmc_persistent") return np_hmc_persistent(model, cfg);
  if (name == "np_lookahead_hmc") return np_lookahead_hmc(model, cfg);
  throw ConfigError("unknown sampler '" + name + "'");
}

}  // namespace npimcmc
