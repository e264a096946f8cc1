#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

#include "metais/errors.hpp"
#include "metais/refine.hpp"
#include "metais/sampling.hpp"
#include "metais/seed.hpp"

namespace metais {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

RefinementRecord record(int iteration, const KrigingModel& model, const MarginSpec& spec,
                        const Eigen::MatrixXd& probes, double wall_ms) {
  return {iteration, model.doe().size(), margin_mass(model, spec, probes), model.lengths(), wall_ms};
}

}  // namespace

void RefinementConfig::validate() const {
  margin.validate();
  if (!(beta0 > 0.0) || !std::isfinite(beta0)) throw ConfigError("refine", "beta0 must be positive");
  if (points_per_iteration < 1) throw ConfigError("refine", "K must be at least 1");
  if (n_candidates < points_per_iteration) {
    throw ConfigError("refine", "n_candidates must be at least K");
  }
  if (budget < 0) throw ConfigError("refine", "budget must be non-negative");
  if (burn_in < 0 || thinning < 1 || max_step_out < 1 || !(step_width > 0.0)) {
    throw ConfigError("refine", "invalid chain settings");
  }
  if (probe_count < 1) throw ConfigError("refine", "probe_count must be positive");
}

void write_trace_csv(std::ostream& out, const RefinementTrace& trace) {
  out << "iteration,doe_size,margin_mass,wall_time_ms\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto row = [&out](const RefinementRecord& r) {
    out << r.iteration << ',' << r.doe_size << ',' << r.margin_mass << ',' << r.wall_time_ms << '\n';
  };
  row(trace.initial);
  for (const auto& r : trace.iterations) row(r);
}

void write_trace_csv(const std::string& path, const RefinementTrace& trace) {
  std::ofstream out(path);
  if (!out) throw InputError("refine", "cannot open '" + path + "' for writing");
  write_trace_csv(out, trace);
}

double weight_density_log(const Eigen::Ref<const Eigen::VectorXd>& u, double beta0) {
  return u.norm() <= beta0 ? 0.0 : kNegInf;
}

double criterion_log(const Surrogate& model, const MarginSpec& spec, double beta0,
                     const Eigen::Ref<const Eigen::VectorXd>& u) {
  const double w = weight_density_log(u, beta0);
  if (w == kNegInf) return kNegInf;
  const double p = prob_in_margin(model, u, spec);
  return p > 0.0 ? std::log(p) + w : kNegInf;
}

double margin_mass(const Surrogate& model, const MarginSpec& spec, const Eigen::MatrixXd& probes) {
  if (probes.rows() == 0) return 0.0;
  Eigen::Index inside = 0;
  for (Eigen::Index i = 0; i < probes.rows(); ++i) {
    if (prob_in_margin(model, probes.row(i).transpose(), spec) > 0.5) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(probes.rows());
}

std::optional<Eigen::VectorXd> best_start(const UnnormalizedTarget& target,
                                          const Eigen::MatrixXd& candidates, int probes,
                                          double radius, std::uint64_t seed) {
  std::optional<Eigen::VectorXd> best;
  double best_value = kNegInf;
  auto consider = [&](const Eigen::VectorXd& x) {
    const double v = target.log_density(x);
    if (std::isfinite(v) && v > best_value) {
      best_value = v;
      best = x;
    }
  };
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) consider(candidates.row(i).transpose());
  Rng rng(seed);
  for (int i = 0; i < probes; ++i) consider(sample_uniform_ball(target.dimension, radius, rng));
  return best;
}

RefinementStep refine_once(const KrigingModel& model, const LimitState& ls,
                           const RefinementConfig& config) {
  config.validate();
  if (ls.dimension() != model.dimension()) {
    throw InputError("refine", "limit state and model dimensions differ");
  }
  const int n = model.dimension();
  RefinementStep step{model, Eigen::MatrixXd(0, n), Eigen::VectorXd(0), false, {}};

  const UnnormalizedTarget target{
      n, [&model, &config](const Eigen::VectorXd& u) {
        return criterion_log(model, config.margin, config.beta0, u);
      }};
  const auto start =
      best_start(target, Eigen::MatrixXd(0, n), 100, config.beta0, derive_seed(config.seed, "start"));
  if (!start) {
    step.margin_converged = true;
    return step;
  }

  ChainConfig chain;
  chain.n_samples = config.n_candidates;
  chain.burn_in = config.burn_in;
  chain.thinning = config.thinning;
  chain.initial_point = *start;
  chain.step_width = Eigen::VectorXd::Constant(1, config.step_width);
  chain.max_step_out = config.max_step_out;
  chain.seed = derive_seed(config.seed, "chain");
  ChainResult draws;
  try {
    draws = slice_sample(target, chain);
  } catch (const SamplerStall&) {
    step.margin_converged = true;
    return step;
  }
  step.chain = draws.diagnostics;

  const Eigen::MatrixXd centers =
      kmeans(draws.draws, config.points_per_iteration, derive_seed(config.seed, "kmeans"));
  const auto kept = model.doe().separated_candidates(centers);
  if (kept.empty()) {
    step.margin_converged = true;
    return step;
  }
  step.points.resize(static_cast<Eigen::Index>(kept.size()), n);
  step.values.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    step.points.row(j) = centers.row(kept[j]);
    step.values[j] = ls.evaluate(step.points.row(j).transpose());
  }
  step.model = add_points(model, step.points, step.values).model;
  return step;
}

RefinementOutcome refine_until_budget(const KrigingModel& model, const LimitState& ls,
                                      const RefinementConfig& config) {
  config.validate();
  const Eigen::Index initial_size = model.doe().size();
  if (config.budget < initial_size) {
    throw ConfigError("refine", "budget " + std::to_string(config.budget) +
                                    " is smaller than the initial design (" +
                                    std::to_string(initial_size) + ")");
  }
  Rng probe_rng(derive_seed(config.seed, "margin-probes"));
  const Eigen::MatrixXd probes =
      sample_uniform_ball(config.probe_count, model.dimension(), config.beta0, probe_rng);

  RefinementOutcome out{model, {}};
  out.trace.initial = record(0, model, config.margin, probes, 0.0);
  long remaining = config.budget - initial_size;
  for (int iteration = 1; remaining > 0; ++iteration) {
    const auto t0 = std::chrono::steady_clock::now();
    RefinementConfig step_config = config;
    step_config.points_per_iteration =
        static_cast<int>(std::min<long>(config.points_per_iteration, remaining));
    step_config.seed = derive_seed(config.seed, "iteration-" + std::to_string(iteration));
    RefinementStep step = refine_once(out.model, ls, step_config);
    out.trace.last_chain = step.chain;
    if (step.margin_converged) {
      out.trace.margin_converged = true;
      break;
    }
    out.model = std::move(step.model);
    remaining -= step.points.rows();
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.trace.iterations.push_back(record(iteration, out.model, config.margin, probes, ms));
  }
  return out;
}

}  // namespace metais
