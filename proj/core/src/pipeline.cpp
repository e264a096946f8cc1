#include "metais/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>

#include "metais/classify.hpp"
#include "metais/errors.hpp"
#include "metais/sampling.hpp"

namespace metais {
namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

Eigen::MatrixXd initial_doe(int dimension, int m0, double beta0, std::uint64_t seed) {
  if (dimension < 1) throw ConfigError("cli", "dimension must be positive");
  if (m0 < dimension + 2) {
    throw ConfigError("cli", "initial DOE size " + std::to_string(m0) + " is below n + 2 = " +
                                 std::to_string(dimension + 2));
  }
  if (!(beta0 > 0.0)) throw ConfigError("cli", "beta0 must be positive");
  Rng rng(seed);
  return sample_uniform_ball(m0, dimension, beta0, rng);
}

RunResult run_pipeline(const RunConfig& config, const LimitState& ls) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const int n = ls.dimension();
  const std::uint64_t evals_at_start = ls.eval_count();
  const StageSeeds seeds = StageSeeds::from_master(config.seed);

  const Eigen::MatrixXd points =
      initial_doe(n, config.initial_doe_size, config.refinement.beta0, seeds.initial_doe);
  Eigen::VectorXd values(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) values[i] = ls.evaluate(points.row(i).transpose());
  const std::uint64_t after_initial = ls.eval_count();

  const auto t_refine = std::chrono::steady_clock::now();
  KrigingModel initial = KrigingModel::fit(DesignOfExperiments(points, values),
                                           RegressionBasis::by_name(config.basis, n));
  RefinementConfig refinement = config.refinement;
  refinement.seed = seeds.refinement;
  RefinementOutcome refined = refine_until_budget(initial, ls, refinement);
  const double refinement_ms = elapsed_ms(t_refine);
  const std::uint64_t after_refinement = ls.eval_count();

  const auto t_estimate = std::chrono::steady_clock::now();
  MetaISConfig estimation = config.estimation;
  const MetaISResult meta = meta_is(refined.model, ls, estimation, seeds.pf_eps, seeds.alpha_corr,
                                    refined.model.doe().points());
  const double estimation_ms = elapsed_ms(t_estimate);

  RunResult out{std::move(refined.model), std::move(refined.trace), meta, seeds};
  out.initial_evals = after_initial - evals_at_start;
  out.refinement_evals = after_refinement - after_initial;
  out.correction_evals = ls.eval_count() - after_refinement;
  out.total_model_evals = ls.eval_count();
  out.refinement_ms = refinement_ms;
  out.estimation_ms = estimation_ms;
  out.total_ms = elapsed_ms(t_start);
  return out;
}

void write_grid_csv(const std::string& path, const Surrogate& model, const MarginSpec& spec,
                    double half_width, int resolution) {
  if (model.dimension() != 2) throw InputError("classify", "grid export needs a 2-D surrogate");
  if (resolution < 2) throw ConfigError("classify", "grid resolution must be at least 2");
  std::ofstream out(path);
  if (!out) throw InputError("classify", "cannot open '" + path + "' for writing");
  out << "x1,x2,mu,sigma,prob_failure,prob_in_margin\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  const double floor = std_floor(model);
  const double step = 2.0 * half_width / (resolution - 1);
  Eigen::VectorXd x(2);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      x << -half_width + i * step, -half_width + j * step;
      const Prediction p = model.predict(x);
      out << x[0] << ',' << x[1] << ',' << p.mean << ',' << p.std << ','
          << prob_failure(p, floor) << ',' << prob_in_margin(p, floor, spec) << '\n';
    }
  }
}

RunResult run(const RunConfig& config) {
  config.validate();
  const LimitState ls = make_benchmark(config.problem, config.problem_params);
  if (config.initial_doe_size < ls.dimension() + 2) {
    throw ConfigError("cli", "initial DOE size must be at least n + 2 = " +
                                 std::to_string(ls.dimension() + 2));
  }
  RunResult result = run_pipeline(config, ls);

  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "result.json");
    if (!out) throw InputError("cli", "cannot write " + (dir / "result.json").string());
    out << result_to_json(config, ls, result) << '\n';
  }
  write_trace_csv((dir / "trace.csv").string(), result.trace);
  write_doe_csv((dir / "doe.csv").string(), result.model.doe());
  if (ls.dimension() == 2 && config.write_grid) {
    write_grid_csv((dir / "grid.csv").string(), result.model, config.refinement.margin,
                   config.grid_half_width, config.grid_resolution);
  }
  return result;
}

}  // namespace metais
