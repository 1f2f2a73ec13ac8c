#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "experiment.hpp"
#include "npimcmc/engine.hpp"
#include "npimcmc/grad.hpp"
#include "npimcmc/involution.hpp"
#include "npimcmc/models.hpp"

namespace npimcmc::cli {

namespace {

// Parameters used when a model needs observations and none are given.
ModelPtr check_model(const std::string& name) {
  if (name == "random_walk") {
    YAML::Node params;
    params["observed_distance"] = 15.0;
    return make_model(name, params);
  }
  return make_model(name, YAML::Node());
}

struct Probe {
  Trace instance;  // supported trace from the prior
  Trace padded;    // instance plus a random tail
};

Value random_value(Stream& s, bool coins) {
  if (coins && s.coin()) return make_bool(s.coin());
  return make_real(s.normal());
}

std::vector<Probe> make_probes(const Model& m, std::size_t n, std::uint64_t seed) {
  std::vector<Probe> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterStream s(stream_id(seed, i, Purpose::init, 0));
    Probe p;
    if (auto t = sample_prior(m, s, 200)) p.instance = *t;
    p.padded = p.instance;
    std::size_t tail = 1 + static_cast<std::size_t>(s.uniform() * 3.0);
    for (std::size_t j = 0; j < tail; ++j) p.padded.push_back(random_value(s, m.has_coins()));
    out.push_back(std::move(p));
  }
  return out;
}

template <class T>
State<T> padded_state(const Probe& p, Stream& s) {
  State<T> st;
  st.x = engine::lift<T>(p.padded, s);
  for (std::size_t i = 0; i < st.x.size(); ++i) st.v.push_back(Coord<T>::draw(s));
  return st;
}

struct Line {
  std::string name;
  bool pass = true;
  std::string detail;
};

template <class T>
void swap_checks(const Model& m, const std::vector<Probe>& probes, std::uint64_t seed,
                 std::vector<Line>& lines) {
  auto swap = swap_involution<T>();
  Line laws{"swap_involution", true, ""};
  Line proj{"swap_projection_commutation", true, ""};
  std::size_t used = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (!std::isfinite(density(m, probes[i].instance))) continue;
    CounterStream s(stream_id(seed, i, Purpose::aux, 1));
    State<T> st = padded_state<T>(probes[i], s);
    State<T> back = swap->apply(swap->apply(st));
    if (!(state_distance(back, st) <= 1e-9) || swap->log_abs_det_jac(st) != 0.0) {
      laws.pass = false;
      laws.detail = fmt::format("probe {} not restored", i);
    }
    auto k0 = probes[i].instance.size();
    auto k = k0 + static_cast<std::size_t>(s.uniform() * double(st.dim() - k0 + 1));
    k = std::min(k, st.dim());
    if (!check_projection_commutation(*swap, m, st, k)) {
      proj.pass = false;
      proj.detail = fmt::format("probe {} at k={}", i, k);
    }
    ++used;
  }
  if (proj.detail.empty()) proj.detail = fmt::format("{} scenarios", used);
  if (laws.detail.empty()) laws.detail = fmt::format("{} states", used);
  lines.push_back(laws);
  lines.push_back(proj);
}

void leapfrog_checks(const ModelPtr& m, const std::vector<Probe>& probes, std::uint64_t seed,
                     std::vector<Line>& lines) {
  LeapfrogStepSpec spec{2, 0.1, m};
  auto fwd = leapfrog_trajectory(spec, true);
  auto bwd = leapfrog_trajectory(spec, false);
  auto hmc = hmc_involution(spec);
  Line trip{"leapfrog_round_trip", true, ""};
  Line inv{"hmc_involution", true, ""};
  Line proj{"leapfrog_projection_commutation", true, ""};
  std::size_t used = 0, skipped = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (!std::isfinite(density(*m, probes[i].instance))) continue;
    CounterStream s(stream_id(seed, i, Purpose::aux, 2));
    RealState st = padded_state<double>(probes[i], s);
    try {
      if (!(state_distance(bwd->apply(fwd->apply(st)), st) <= 1e-9)) {
        trip.pass = false;
        trip.detail = fmt::format("probe {}", i);
      }
      if (!(state_distance(hmc->apply(hmc->apply(st)), st) <= 1e-9)) {
        inv.pass = false;
        inv.detail = fmt::format("probe {}", i);
      }
      std::size_t upd = 1 + static_cast<std::size_t>(s.uniform() * 3.0 * double(spec.L));
      upd = std::min(upd, 3 * spec.L);
      bool dir = s.coin();
      auto f = leapfrog_update_family(upd, spec, dir);
      auto k0 = probes[i].instance.size();
      auto k = std::min(st.dim(), k0 + static_cast<std::size_t>(s.uniform() * double(st.dim() - k0 + 1)));
      if (!check_projection_commutation(*f, *m, st, k)) {
        proj.pass = false;
        proj.detail = fmt::format("probe {} update {} at k={}", i, upd, k);
      }
      ++used;
    } catch (const Error&) {
      // A trajectory that leaves the support has no defined round trip.
      ++skipped;
    }
  }
  for (Line* l : {&trip, &inv, &proj})
    if (l->detail.empty()) l->detail = fmt::format("{} states, {} left the support", used, skipped);
  lines.push_back(trip);
  lines.push_back(inv);
  lines.push_back(proj);
}

void gradient_check(const Model& m, const std::vector<Probe>& probes, std::vector<Line>& lines) {
  Line g{"gradient_vs_finite_differences", true, ""};
  std::size_t used = 0, skipped = 0, refined = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (!std::isfinite(density(m, probes[i].instance))) continue;
    RealVector q;
    for (const auto& v : probes[i].padded) q.push_back(as_real(v));
    RealVector fd;
    try {
      fd = grad_U_fd(m, q);
    } catch (const StepCrossesSupportBoundary&) {
      ++skipped;
      continue;
    }
    RealVector ad = grad_U(m, q);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    for (std::size_t j = 0; j < q.size(); ++j) {
      double err = rel(ad[j], fd[j]);
      if (err > 1e-4) {
        // A kink within h of q breaks the central difference; refine h once.
        try {
          err = rel(ad[j], grad_U_fd(m, q, 1e-8)[j]);
          ++refined;
        } catch (const StepCrossesSupportBoundary&) {
        }
      }
      worst = std::max(worst, err);
      if (!(err <= 1e-4)) {
        g.pass = false;
        g.detail = fmt::format("probe {} coordinate {} at {}: {} vs {}", i, j, q[j], ad[j], fd[j]);
      }
    }
    ++used;
  }
  if (g.pass)
    g.detail = fmt::format("{} points, worst relative error {:.2e}, {} near a boundary, {} refined",
                           used, worst, skipped, refined);
  lines.push_back(g);
}

}  // namespace

int run_checks(const std::string& model_name, std::size_t probes, std::uint64_t seed,
               std::ostream& out, std::ostream& err) {
  ModelPtr model;
  try {
    model = check_model(model_name);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  if (probes == 0) {
    err << "warning: no probes requested, every property passes vacuously\n";
    out << "PASS all (0 probes)\n";
    return kExitOk;
  }

  auto ps = make_probes(*model, probes, seed);
  std::vector<Line> lines;

  std::vector<Trace> traces;
  for (const auto& p : ps) traces.push_back(p.padded);
  auto report = check_prefix_property(*model, traces);
  Line prefix{"prefix_property", report.ok(), ""};
  if (report.ok()) {
    prefix.detail = fmt::format("{} probes", report.probes);
  } else {
    const auto& v = report.violations.front();
    std::string lens;
    for (auto l : v.supported_lengths) lens += (lens.empty() ? "" : ",") + std::to_string(l);
    prefix.detail = fmt::format("{} of {} probes violate, probe {} supported at lengths {}",
                                report.violations.size(), report.probes, v.probe, lens);
  }
  lines.push_back(prefix);

  Line inst{"instance_consistency", true, ""};
  std::size_t checked = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!std::isfinite(density(*model, ps[i].instance))) continue;
    CounterStream s(stream_id(seed, i, Purpose::pairing, 0));
    auto x = engine::lift<EntropyPair>(ps[i].padded, s);
    auto found = find_supported_instance(*model, x);
    if (!found || found->trace != ps[i].instance) {
      inst.pass = false;
      inst.detail = fmt::format("probe {}: instance of {} not recovered", i, to_string(ps[i].padded));
      break;
    }
    ++checked;
  }
  if (inst.pass) inst.detail = fmt::format("{} supported probes", checked);
  lines.push_back(inst);

  try {
    if (model->has_coins())
      swap_checks<EntropyPair>(*model, ps, seed, lines);
    else
      swap_checks<double>(*model, ps, seed, lines);
    if (model->supports_gradient()) {
      leapfrog_checks(model, ps, seed, lines);
      gradient_check(*model, ps, lines);
    }
  } catch (const Error& e) {
    lines.push_back({"property_suite", false, e.what()});
  }

  bool all = true;
  for (const auto& l : lines) {
    out << (l.pass ? "PASS " : "FAIL ") << l.name << " (" << l.detail << ")\n";
    all = all && l.pass;
  }
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace npimcmc::cli
