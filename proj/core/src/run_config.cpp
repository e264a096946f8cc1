#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metais/errors.hpp"
#include "metais/pipeline.hpp"
#include "metais/seed.hpp"

namespace metais {
namespace {

using json = nlohmann::json;

void reject_unknown(const json& object, const std::set<std::string>& known, const std::string& where) {
  if (!object.is_object()) throw ConfigError("cli", where + " must be an object");
  for (const auto& item : object.items()) {
    if (!known.count(item.key())) throw ConfigError("cli", "unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& object, const char* key, T& target) {
  if (!object.contains(key)) return;
  try {
    target = object.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("cli", std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  const auto names = benchmark_names();
  if (std::find(names.begin(), names.end(), problem) == names.end()) {
    throw ConfigError("cli", "unknown problem '" + problem + "'");
  }
  if (initial_doe_size < 2) throw ConfigError("cli", "initial DOE size must be at least 2");
  if (initial_doe_rule != "uniform_ball") {
    throw ConfigError("cli", "unknown initial DOE rule '" + initial_doe_rule + "'");
  }
  if (basis != "constant" && basis != "linear") {
    throw ConfigError("cli", "unknown regression basis '" + basis + "'");
  }
  refinement.validate();
  if (refinement.budget < initial_doe_size) {
    throw ConfigError("cli", "refinement budget is smaller than the initial DOE");
  }
  if (refinement.points_per_iteration > refinement.budget - initial_doe_size) {
    throw ConfigError("cli", "K = " + std::to_string(refinement.points_per_iteration) +
                                 " exceeds budget - m0 = " +
                                 std::to_string(refinement.budget - initial_doe_size));
  }
  if (estimation.n_eps < 2) throw ConfigError("cli", "n_eps must be at least 2");
  if (estimation.n_corr < 2) throw ConfigError("cli", "n_corr must be at least 2");
  const auto& c = estimation.chain;
  if (c.burn_in < 0 || c.thinning < 1 || !(c.step_width > 0.0) || c.max_step_out < 1 ||
      c.start_probes < 0 || !(c.start_radius > 0.0)) {
    throw ConfigError("cli", "invalid correction chain settings");
  }
  if (write_grid && (grid_resolution < 2 || !(grid_half_width > 0.0))) {
    throw ConfigError("cli", "grid needs resolution >= 2 and a positive half width");
  }
  if (output_dir.empty()) throw ConfigError("cli", "output_dir is empty");
}

RunConfig default_run_config(const std::string& problem) {
  RunConfig config;
  config.problem = problem;
  if (problem == "quad20") {
    config.initial_doe_size = 60;
    config.basis = "linear";
    config.refinement.budget = 200;
    config.refinement.points_per_iteration = 35;
    config.refinement.n_candidates = 2000;
    config.refinement.thinning = 2;
    config.refinement.burn_in = 200;
    config.refinement.probe_count = 2000;
    config.estimation.n_eps = 2000000;
    config.estimation.n_corr = 300;
    config.write_grid = false;
  } else {
    config.initial_doe_size = 12;
    config.refinement.budget = 100;
    config.refinement.points_per_iteration = 11;
    config.refinement.n_candidates = 2000;
    config.refinement.thinning = 2;
    config.refinement.burn_in = 200;
    config.refinement.probe_count = 10000;
    config.estimation.n_eps = 100000;
    config.estimation.n_corr = 300;
  }
  return config;
}

std::string to_json(const RunConfig& c) {
  json params = json::object();
  for (const auto& [key, value] : c.problem_params) params[key] = value;
  const auto& r = c.refinement;
  const auto& e = c.estimation;
  json out = {
      {"schema", kConfigSchema},
      {"problem", {{"name", c.problem}, {"params", params}}},
      {"initial_doe", {{"size", c.initial_doe_size}, {"rule", c.initial_doe_rule}}},
      {"kriging", {{"basis", c.basis}}},
      {"refinement",
       {{"margin_k", r.margin.k},
        {"beta0", r.beta0},
        {"n_candidates", r.n_candidates},
        {"points_per_iteration", r.points_per_iteration},
        {"budget", r.budget},
        {"burn_in", r.burn_in},
        {"thinning", r.thinning},
        {"step_width", r.step_width},
        {"max_step_out", r.max_step_out},
        {"probe_count", r.probe_count}}},
      {"estimation",
       {{"n_eps", e.n_eps},
        {"n_corr", e.n_corr},
        {"chain",
         {{"burn_in", e.chain.burn_in},
          {"thinning", e.chain.thinning},
          {"step_width", e.chain.step_width},
          {"max_step_out", e.chain.max_step_out},
          {"start_probes", e.chain.start_probes},
          {"start_radius", e.chain.start_radius}}}}},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"grid",
       {{"enabled", c.write_grid}, {"resolution", c.grid_resolution}, {"half_width", c.grid_half_width}}},
  };
  return out.dump(2);
}

RunConfig run_config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("cli", std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, {"schema", "problem", "initial_doe", "kriging", "refinement", "estimation",
                       "seed", "output_dir", "grid"},
                 "config");
  if (doc.contains("schema") && doc["schema"] != kConfigSchema) {
    throw ConfigError("cli", "unsupported config schema " + doc["schema"].dump());
  }
  if (!doc.contains("problem")) throw ConfigError("cli", "config needs a 'problem' section");
  const json& problem = doc["problem"];
  reject_unknown(problem, {"name", "params"}, "problem");
  std::string name;
  read(problem, "name", name);
  const auto names = benchmark_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ConfigError("cli", "unknown problem '" + name + "'");
  }
  RunConfig c = default_run_config(name);
  if (problem.contains("params")) {
    reject_unknown(problem["params"], {"b", "kappa", "e", "beta", "dimension"}, "problem.params");
    for (const auto& item : problem["params"].items()) {
      if (!item.value().is_number()) throw ConfigError("cli", "problem.params values must be numbers");
      c.problem_params[item.key()] = item.value().get<double>();
    }
  }
  if (doc.contains("initial_doe")) {
    const json& s = doc["initial_doe"];
    reject_unknown(s, {"size", "rule"}, "initial_doe");
    read(s, "size", c.initial_doe_size);
    read(s, "rule", c.initial_doe_rule);
  }
  if (doc.contains("kriging")) {
    reject_unknown(doc["kriging"], {"basis"}, "kriging");
    read(doc["kriging"], "basis", c.basis);
  }
  if (doc.contains("refinement")) {
    const json& s = doc["refinement"];
    reject_unknown(s, {"margin_k", "beta0", "n_candidates", "points_per_iteration", "budget", "burn_in",
                       "thinning", "step_width", "max_step_out", "probe_count"},
                   "refinement");
    auto& r = c.refinement;
    read(s, "margin_k", r.margin.k);
    read(s, "beta0", r.beta0);
    read(s, "n_candidates", r.n_candidates);
    read(s, "points_per_iteration", r.points_per_iteration);
    read(s, "budget", r.budget);
    read(s, "burn_in", r.burn_in);
    read(s, "thinning", r.thinning);
    read(s, "step_width", r.step_width);
    read(s, "max_step_out", r.max_step_out);
    read(s, "probe_count", r.probe_count);
  }
  if (doc.contains("estimation")) {
    const json& s = doc["estimation"];
    reject_unknown(s, {"n_eps", "n_corr", "chain"}, "estimation");
    read(s, "n_eps", c.estimation.n_eps);
    read(s, "n_corr", c.estimation.n_corr);
    if (s.contains("chain")) {
      const json& ch = s["chain"];
      reject_unknown(ch, {"burn_in", "thinning", "step_width", "max_step_out", "start_probes",
                          "start_radius"},
                     "estimation.chain");
      auto& k = c.estimation.chain;
      read(ch, "burn_in", k.burn_in);
      read(ch, "thinning", k.thinning);
      read(ch, "step_width", k.step_width);
      read(ch, "max_step_out", k.max_step_out);
      read(ch, "start_probes", k.start_probes);
      read(ch, "start_radius", k.start_radius);
    }
  }
  read(doc, "seed", c.seed);
  read(doc, "output_dir", c.output_dir);
  if (doc.contains("grid")) {
    const json& s = doc["grid"];
    reject_unknown(s, {"enabled", "resolution", "half_width"}, "grid");
    read(s, "enabled", c.write_grid);
    read(s, "resolution", c.grid_resolution);
    read(s, "half_width", c.grid_half_width);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cli", "cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return run_config_from_json(buffer.str());
}

StageSeeds StageSeeds::from_master(std::uint64_t master) {
  return {derive_seed(master, "initial-doe"), derive_seed(master, "refinement"),
          derive_seed(master, "pf-eps"), derive_seed(master, "alpha-corr")};
}

}  // namespace metais
