#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "metais/estimate.hpp"
#include "metais/kriging.hpp"
#include "metais/problem.hpp"
#include "metais/refine.hpp"

namespace metais {

inline constexpr std::string_view kResultSchema = "metais.result/1";
inline constexpr std::string_view kConfigSchema = "metais.config/1";

/// Everything one pipeline run needs. Serialized as JSON (see README for
/// the schema); to_json / run_config_from_json round-trip losslessly.
struct RunConfig {
  std::string problem = "parabola2d";
  ProblemParams problem_params;

  int initial_doe_size = 12;
  std::string initial_doe_rule = "uniform_ball";
  std::string basis = "constant";

  /// refinement.seed is ignored: every stage seed derives from `seed`.
  RefinementConfig refinement;
  MetaISConfig estimation;

  std::uint64_t seed = 1;
  std::string output_dir = "metais-out";

  /// Classification grid for 2-D problems: [-half_width, half_width]^2.
  bool write_grid = true;
  int grid_resolution = 81;
  double grid_half_width = 6.0;

  /// Throws ConfigError; checks only what does not need the problem.
  void validate() const;
};

/// Defaults tuned per catalog problem.
RunConfig default_run_config(const std::string& problem);

std::string to_json(const RunConfig& config);
RunConfig run_config_from_json(std::string_view text);
RunConfig load_run_config(const std::string& path);

/// Stage seeds derived from the master seed.
struct StageSeeds {
  std::uint64_t initial_doe = 0;
  std::uint64_t refinement = 0;
  std::uint64_t pf_eps = 0;
  std::uint64_t alpha_corr = 0;

  static StageSeeds from_master(std::uint64_t master);
};

/// m0 points uniform in the beta0-ball of R^n. Requires m0 >= n + 2.
Eigen::MatrixXd initial_doe(int dimension, int m0, double beta0, std::uint64_t seed);

struct RunResult {
  KrigingModel model;
  RefinementTrace trace;
  MetaISResult meta;
  StageSeeds seeds;
  std::uint64_t initial_evals = 0;
  std::uint64_t refinement_evals = 0;
  std::uint64_t correction_evals = 0;
  std::uint64_t total_model_evals = 0;  ///< limit-state counter at exit
  double refinement_ms = 0.0;
  double estimation_ms = 0.0;
  double total_ms = 0.0;
};

/// Initial design, refinement and meta-IS estimation on `ls`. Nothing is
/// written to disk.
RunResult run_pipeline(const RunConfig& config, const LimitState& ls);

/// Resolves the problem, runs the pipeline and writes result.json,
/// trace.csv, doe.csv and (2-D only) grid.csv into config.output_dir.
RunResult run(const RunConfig& config);

std::string result_to_json(const RunConfig& config, const LimitState& ls, const RunResult& result);

/// "x1,x2,mu,sigma,prob_failure,prob_in_margin" on a regular grid.
void write_grid_csv(const std::string& path, const Surrogate& model, const MarginSpec& spec,
                    double half_width, int resolution);

}  // namespace metais
