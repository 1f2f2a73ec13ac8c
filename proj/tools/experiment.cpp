#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "npimcmc/diagnostics.hpp"
#include "npimcmc/models.hpp"

namespace npimcmc::cli {

namespace {

using json = nlohmann::json;

const std::set<std::string> kOutputs = {"samples", "stats", "tvd", "ess", "lppd"};

void reject_unknown_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!node || node.IsNull()) return;
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <class T>
T get_or(const YAML::Node& node, const std::string& key, T fallback) {
  if (!node || !node.IsMap() || !node[key]) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("bad value for '{}'", key));
  }
}

template <class T>
T require(const YAML::Node& node, const std::string& key, const std::string& where) {
  if (!node || !node.IsMap() || !node[key]) throw ConfigError(fmt::format("{} needs '{}'", where, key));
  return get_or<T>(node, key, T{});
}

std::vector<double> read_data_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::replace(tok.begin(), tok.end(), ',', ' ');
    std::istringstream parts(tok);
    double v;
    while (parts >> v) out.push_back(v);
  }
  return out;
}

Trace parse_trace(const YAML::Node& node) {
  if (!node.IsSequence()) throw ConfigError("init must be a list");
  Trace t;
  for (const auto& item : node) {
    auto s = item.as<std::string>();
    if (s == "T" || s == "true")
      t.push_back(make_bool(true));
    else if (s == "F" || s == "false")
      t.push_back(make_bool(false));
    else {
      try {
        t.push_back(make_real(item.as<double>()));
      } catch (const YAML::Exception&) {
        throw ConfigError("init entries must be reals or T/F");
      } catch (const InvalidValue&) {
        throw ConfigError("init entries must be finite");
      }
    }
  }
  return t;
}

SpaceKind parse_space(const std::string& s) {
  if (s == "auto") return SpaceKind::automatic;
  if (s == "real") return SpaceKind::real;
  if (s == "hybrid") return SpaceKind::hybrid;
  throw ConfigError("config.space must be auto, real or hybrid");
}

std::string space_name(SpaceKind k) {
  switch (k) {
    case SpaceKind::automatic: return "auto";
    case SpaceKind::real: return "real";
    case SpaceKind::hybrid: return "hybrid";
  }
  return "auto";
}

}  // namespace

bool ExperimentSpec::wants(const std::string& output) const {
  return std::find(outputs.begin(), outputs.end(), output) != outputs.end();
}

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"geometric",   "geometric_real",
                                                 "igmm",        "random_walk",
                                                 "conjugate_normal", "broken-fixture"};
  return names;
}

ModelPtr make_model(const std::string& name, const YAML::Node& params) {
  const std::string where = "model.params";
  if (name == "geometric" || name == "geometric_real" || name == "broken-fixture") {
    reject_unknown_keys(params, {}, where);
    if (name == "geometric") return geometric();
    if (name == "geometric_real") return geometric_real();
    return broken_prefix_fixture();
  }
  if (name == "igmm") {
    reject_unknown_keys(params, {"data", "data_file"}, where);
    if (params && params["data"] && params["data_file"])
      throw ConfigError("igmm takes either data or data_file");
    if (params && params["data"]) return igmm(get_or<std::vector<double>>(params, "data", {}));
    if (params && params["data_file"])
      return igmm(read_data_file(params["data_file"].as<std::string>()));
    return igmm(default_igmm_data().data);
  }
  if (name == "random_walk") {
    reject_unknown_keys(params, {"observed_distance", "obs_std", "bound"}, where);
    auto observed = require<double>(params, "observed_distance", "random_walk");
    try {
      return random_walk(observed, get_or(params, "obs_std", 0.1), get_or(params, "bound", 10.0));
    } catch (const PreconditionViolation& e) {
      throw ConfigError(e.what());
    }
  }
  if (name == "conjugate_normal") {
    reject_unknown_keys(params, {"obs"}, where);
    return conjugate_normal(get_or(params, "obs", 2.0));
  }
  throw ConfigError("unknown model '" + name + "'");
}

ExperimentSpec parse_spec(const YAML::Node& root) {
  if (!root || !root.IsMap()) throw ConfigError("spec must be a mapping");
  reject_unknown_keys(root,
                      {"spec_version", "model", "sampler", "config", "seed", "n_samples",
                       "n_chains", "burn_in", "init", "outputs", "lppd_test_data"},
                      "spec");
  if (get_or<int>(root, "spec_version", -1) != kSpecVersion)
    throw ConfigError(fmt::format("spec_version must be {}", kSpecVersion));

  ExperimentSpec spec;
  const auto model = root["model"];
  if (!model || !model.IsMap()) throw ConfigError("spec needs a model section");
  reject_unknown_keys(model, {"name", "params"}, "model");
  spec.model_name = require<std::string>(model, "name", "model");
  if (model["params"]) spec.model_params.reset(model["params"]);

  const auto sampler = root["sampler"];
  if (!sampler || !sampler.IsMap()) throw ConfigError("spec needs a sampler section");
  reject_unknown_keys(sampler, {"name", "members"}, "sampler");
  spec.sampler_name = require<std::string>(sampler, "name", "sampler");
  spec.mixture_members = get_or<std::vector<std::string>>(sampler, "members", {});
  bool is_mixture = spec.sampler_name == "mixture";
  auto known = sampler_names();
  auto is_known = [&](const std::string& n) {
    return std::find(known.begin(), known.end(), n) != known.end();
  };
  if (!is_mixture && !is_known(spec.sampler_name))
    throw ConfigError("unknown sampler '" + spec.sampler_name + "'");
  if (is_mixture && spec.mixture_members.empty())
    throw ConfigError("mixture sampler needs members");
  if (!is_mixture && !spec.mixture_members.empty())
    throw ConfigError("members only apply to the mixture sampler");
  for (const auto& m : spec.mixture_members)
    if (!is_known(m) || m == "np_lookahead_hmc")
      throw ConfigError("mixture member '" + m + "' is not supported");

  const auto cfg = root["config"];
  reject_unknown_keys(cfg,
                      {"dim_cap", "leapfrog_L", "epsilon", "alpha", "lookahead_K",
                       "proposal_scale", "space", "verify_slices"},
                      "config");
  SamplerConfig& c = spec.config;
  c.dim_cap = get_or(cfg, "dim_cap", c.dim_cap);
  c.leapfrog_L = get_or(cfg, "leapfrog_L", c.leapfrog_L);
  c.epsilon = get_or(cfg, "epsilon", c.epsilon);
  c.alpha = get_or(cfg, "alpha", c.alpha);
  c.lookahead_K = get_or(cfg, "lookahead_K", c.lookahead_K);
  c.proposal_scale = get_or(cfg, "proposal_scale", c.proposal_scale);
  c.space = parse_space(get_or<std::string>(cfg, "space", "auto"));
  c.verify_slices = get_or(cfg, "verify_slices", false);
  c.seed = get_or<std::uint64_t>(root, "seed", 0);

  spec.n_samples = require<std::size_t>(root, "n_samples", "spec");
  if (spec.n_samples < 1) throw ConfigError("n_samples must be at least 1");
  spec.n_chains = get_or<std::size_t>(root, "n_chains", 1);
  if (spec.n_chains < 1) throw ConfigError("n_chains must be at least 1");
  spec.burn_in = get_or<std::size_t>(root, "burn_in", 0);
  if (root["init"]) spec.init = parse_trace(root["init"]);
  spec.outputs = get_or<std::vector<std::string>>(root, "outputs", {"samples", "stats"});
  for (const auto& o : spec.outputs)
    if (!kOutputs.count(o)) throw ConfigError("unknown output '" + o + "'");
  spec.lppd_test_data = get_or<std::vector<double>>(root, "lppd_test_data", {});
  if (spec.wants("lppd") && spec.lppd_test_data.empty())
    throw ConfigError("lppd output needs lppd_test_data");
  bool geometric_model = spec.model_name == "geometric" || spec.model_name == "geometric_real";
  if (spec.wants("tvd") && !geometric_model)
    throw ConfigError("tvd output needs a model with a known pmf (geometric, geometric_real)");
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("cannot parse {}: {}", path.string(), e.what()));
  }
  return parse_spec(root);
}

SamplerPtr build_sampler(const ExperimentSpec& spec, const ModelPtr& model) {
  try {
    if (spec.sampler_name != "mixture") return make_sampler(spec.sampler_name, model, spec.config);
    std::vector<SamplerPtr> members;
    for (const auto& m : spec.mixture_members) members.push_back(make_sampler(m, model, spec.config));
    return mixture_wrap(std::move(members), uniform_mixture(spec.mixture_members.size()));
  } catch (const GradientUnsupported& e) {
    throw ConfigError(e.what());
  }
}

std::size_t worker_count(std::size_t n_chains) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NPIMCMC_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) n = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(n, n_chains));
}

namespace {

std::optional<double> first_real(const Trace& t) {
  for (const auto& v : t)
    if (is_real(v)) return as_real(v);
  return std::nullopt;
}

json ess_block(const std::vector<Trace>& samples) {
  json out = json::object();
  if (samples.size() < 10) return out;
  std::vector<double> dims, firsts;
  bool all_real = true;
  for (const auto& t : samples) {
    dims.push_back(double(t.size()));
    auto r = first_real(t);
    if (!r) all_real = false;
    else firsts.push_back(*r);
  }
  out["dim"] = ess(dims);
  out["first_real"] = all_real ? json(ess(firsts)) : json(nullptr);
  return out;
}

double tvd_of(const Model& m, const std::vector<Trace>& samples) {
  EmpiricalDist emp;
  for (const auto& t : samples) emp.add(static_cast<std::int64_t>(return_value(m, t)));
  return tvd(emp, geometric_pmf, geometric_support());
}

}  // namespace

int run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                   std::ostream& err) {
  ModelPtr model;
  SamplerPtr sampler;
  std::vector<Trace> inits(spec.n_chains);
  try {
    model = make_model(spec.model_name, spec.model_params);
    sampler = build_sampler(spec, model);
    for (std::size_t c = 0; c < spec.n_chains; ++c) {
      inits[c] = spec.init ? *spec.init : default_initial_trace(*model, spec.config.seed, c);
      if (!std::isfinite(density(*model, inits[c])))
        throw ConfigError("init trace is outside the model's support: " + to_string(inits[c]));
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  std::vector<ChainResult> results(spec.n_chains);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < spec.n_chains; c = next++) {
      ChainOptions opts{spec.n_samples, spec.burn_in, spec.config.seed, c};
      results[c] = run_chain(*sampler, inits[c], opts);
    }
  };
  std::size_t n_workers = worker_count(spec.n_chains);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < n_workers; ++i) pool.emplace_back(worker);
    worker();
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    err << "error: cannot create " << out_dir.string() << ": " << ec.message() << "\n";
    return kExitRuntime;
  }

  bool failed = false;
  for (std::size_t c = 0; c < results.size(); ++c)
    if (results[c].error) {
      failed = true;
      err << fmt::format("error: chain {} aborted: {}\n", c, *results[c].error);
    }

  if (spec.wants("samples")) {
    std::ofstream csv(out_dir / "samples.csv", std::ios::binary);
    csv << "chain,step,dim,accepted,values\n";
    for (std::size_t c = 0; c < results.size(); ++c) {
      const auto& r = results[c];
      for (std::size_t i = 0; i < r.samples.size(); ++i) {
        const auto& rec = r.records[spec.burn_in + i];
        csv << c << ',' << rec.step << ',' << r.samples[i].size() << ',' << (rec.accepted ? 1 : 0)
            << ",\"" << to_csv_field(r.samples[i]) << "\"\n";
      }
    }
  }

  if (spec.wants("stats") || spec.wants("tvd") || spec.wants("ess") || spec.wants("lppd")) {
    json stats;
    stats["spec_version"] = kSpecVersion;
    stats["model"] = model->describe();
    stats["sampler"] = sampler->name();
    const auto& c = spec.config;
    stats["config"] = {{"dim_cap", c.dim_cap},       {"leapfrog_L", c.leapfrog_L},
                       {"epsilon", c.epsilon},       {"alpha", c.alpha},
                       {"lookahead_K", c.lookahead_K}, {"proposal_scale", c.proposal_scale},
                       {"space", space_name(c.space)}, {"seed", c.seed}};
    stats["n_samples"] = spec.n_samples;
    stats["burn_in"] = spec.burn_in;
    stats["n_chains"] = spec.n_chains;
    stats["partial"] = failed;
    std::vector<Trace> pooled;
    std::size_t steps = 0, accepted = 0;
    json chains = json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      const auto& s = r.stats;
      json ch = {{"chain", i},
                 {"steps", s.steps},
                 {"accepted", s.accepted},
                 {"acceptance_rate", s.acceptance_rate},
                 {"total_extensions", s.total_extensions},
                 {"max_extensions", s.max_extensions},
                 {"halted", s.halted},
                 {"direction_flips", s.flips},
                 {"flips_match_rejections", s.flips_match_rejections},
                 {"wall_time_s", s.wall_time_s}};
      if (s.slice_checks > 0) {
        ch["slice_checks"] = s.slice_checks;
        ch["max_slice_error"] = s.max_slice_error;
      }
      if (r.error) ch["error"] = *r.error;
      if (spec.wants("ess")) ch["ess"] = ess_block(r.samples);
      if (spec.wants("tvd") && !r.samples.empty()) ch["tvd"] = tvd_of(*model, r.samples);
      steps += s.steps;
      accepted += s.accepted;
      pooled.insert(pooled.end(), r.samples.begin(), r.samples.end());
      chains.push_back(std::move(ch));
    }
    stats["chains"] = std::move(chains);
    stats["acceptance_rate"] = steps ? double(accepted) / double(steps) : 0.0;
    if (spec.wants("tvd") && !pooled.empty()) stats["tvd"] = tvd_of(*model, pooled);
    if (spec.wants("lppd") && !pooled.empty()) {
      try {
        stats["lppd"] = lppd(pooled, *model, spec.lppd_test_data);
      } catch (const Error& e) {
        err << "error: lppd: " << e.what() << "\n";
        failed = true;
      }
    }
    std::ofstream out(out_dir / "stats.json", std::ios::binary);
    out << stats.dump(2) << "\n";
  }
  return failed ? kExitRuntime : kExitOk;
}

}  // namespace npimcmc::cli
