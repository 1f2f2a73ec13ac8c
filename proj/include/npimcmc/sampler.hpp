#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "npimcmc/involution.hpp"
#include "npimcmc/kernels.hpp"
#include "npimcmc/model.hpp"

namespace npimcmc {

enum class SpaceKind { automatic, real, hybrid };

struct SamplerConfig {
  std::size_t dim_cap = 10000;
  std::size_t leapfrog_L = 5;
  double epsilon = 0.1;
  double alpha = 1.0;  // persistence: 1 resamples momentum fully
  std::size_t lookahead_K = 0;
  std::uint64_t seed = 0;
  double proposal_scale = 1.0;  // random-walk kernel scale for the MH samplers
  SpaceKind space = SpaceKind::automatic;
  // Recompute every slice-extended trajectory in full and record the largest
  // discrepancy (HMC samplers). Diagnostic; slows sampling down.
  bool verify_slices = false;

  void validate(bool uses_leapfrog) const;
};

struct ChainState {
  Trace trace;
  bool direction = true;
  RealVector momentum;
};

struct StepOutcome {
  Trace next;
  bool accepted = false;
  double log_ratio = -INFINITY;
  std::size_t extensions = 0;
  std::size_t proposal_dim = 0;  // 0 when the program rejected the proposal
  bool halted = false;
  std::size_t slice_checks = 0;
  double max_slice_error = 0.0;
};

// One step of NP-iMCMC on the real-only space. The involution is re-applied
// in full after every extension.
StepOutcome npimcmc_step(const Model& m, const AuxKernel<double>& aux, const Bijection<double>& inv,
                         const Trace& t0, StepStreams& streams, const SamplerConfig& cfg);

// Hybrid space: traces are paired into entropy vectors.
StepOutcome hybrid_npimcmc_step(const Model& m, const AuxKernel<EntropyPair>& aux,
                                const Bijection<EntropyPair>& inv, const Trace& t0,
                                StepStreams& streams, const SamplerConfig& cfg);

// Multiple-step variant: updates are applied one by one and intermediate
// states are extended through slices. With verify_slices each extension is
// also recomputed in full and the discrepancy reported.
StepOutcome multistep_npimcmc_step(const Model& m, const AuxKernel<double>& aux,
                                   const std::vector<BijectionPtr<double>>& updates,
                                   const Trace& t0, StepStreams& streams,
                                   const SamplerConfig& cfg, bool verify_slices = false);
StepOutcome multistep_npimcmc_step(const Model& m, const AuxKernel<EntropyPair>& aux,
                                   const std::vector<BijectionPtr<EntropyPair>>& updates,
                                   const Trace& t0, StepStreams& streams,
                                   const SamplerConfig& cfg, bool verify_slices = false);

struct Proposal {
  ChainState on_accept;
  ChainState on_reject;
  double log_ratio = -INFINITY;
  std::size_t extensions = 0;
  std::size_t proposal_dim = 0;
  bool halted = false;
  std::size_t slice_checks = 0;
  double max_slice_error = 0.0;
};

struct StepInfo {
  bool accepted = false;
  double log_ratio = -INFINITY;
  std::size_t extensions = 0;
  std::size_t proposal_dim = 0;
  bool halted = false;
  bool direction_flipped = false;
  std::size_t slice_checks = 0;
  double max_slice_error = 0.0;
};

class Sampler {
 public:
  explicit Sampler(ModelPtr model) : model_(std::move(model)) {}
  virtual ~Sampler() = default;

  virtual std::string name() const = 0;
  virtual bool persistent() const { return false; }

  // Chain state for a starting trace; momentum-carrying samplers draw an
  // initial momentum from the aux stream.
  virtual ChainState initial_state(const Trace& t, StepStreams& streams) const;

  virtual Proposal propose(const ChainState& cur, StepStreams& streams) const = 0;

  // Propose, then accept with probability min(1, exp(log_ratio)).
  virtual StepInfo step(ChainState& cur, StepStreams& streams) const;

  const Model& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }

 protected:
  StepInfo finish(ChainState& cur, Proposal&& p, bool accepted) const;

  ModelPtr model_;
};

using SamplerPtr = std::shared_ptr<const Sampler>;

SamplerPtr np_mh(ModelPtr model, const SamplerConfig& cfg);
SamplerPtr np_mh_persistent(ModelPtr model, const SamplerConfig& cfg, Eta eta = Eta::sum());
SamplerPtr np_hmc(ModelPtr model, const SamplerConfig& cfg);
SamplerPtr np_hmc_persistent(ModelPtr model, const SamplerConfig& cfg);
SamplerPtr np_lookahead_hmc(ModelPtr model, const SamplerConfig& cfg);

// NP-HMC transition with a given direction; used to pair NP-HMC with the
// persistent variant.
Proposal np_hmc_transition(const Sampler& np_hmc_sampler, const Trace& t0, bool direction,
                           StepStreams& streams);

// Mixture over member samplers with a state-dependent index distribution.
struct MixtureKernel {
  // Probabilities of each member given the current trace.
  std::function<std::vector<double>(const Trace&)> probs;
};
MixtureKernel uniform_mixture(std::size_t n);

SamplerPtr mixture_wrap(std::vector<SamplerPtr> members, MixtureKernel kernel);

// Names accepted by make_sampler: np_mh, np_mh_persistent, np_hmc,
// np_hmc_persistent, np_lookahead_hmc.
SamplerPtr make_sampler(const std::string& name, ModelPtr model, const SamplerConfig& cfg);
const std::vector<std::string>& sampler_names();

}  // namespace npimcmc
