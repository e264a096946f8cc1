#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace metais {

/// Log-density known up to an additive constant; -inf encodes zero density.
struct UnnormalizedTarget {
  int dimension = 0;
  std::function<double(const Eigen::VectorXd&)> log_density;
};

struct ChainConfig {
  int n_samples = 1000;
  int burn_in = 1000;
  int thinning = 5;
  Eigen::VectorXd initial_point;
  /// Per-coordinate initial bracket width; a single entry is broadcast.
  Eigen::VectorXd step_width = Eigen::VectorXd::Ones(1);
  int max_step_out = 50;
  std::uint64_t seed = 0;
  /// Shrinkage contractions before the sampler gives up.
  int max_shrink = 1000;
};

struct ChainDiagnostics {
  std::uint64_t density_evaluations = 0;
  /// Coordinate updates whose stepping-out stopped at max_step_out.
  std::uint64_t step_out_limit_hits = 0;
  std::uint64_t coordinate_updates = 0;
  int kept = 0;
};

struct ChainResult {
  Eigen::MatrixXd draws;            ///< n_samples x n
  Eigen::VectorXd log_densities;    ///< target log-density at each draw
  ChainDiagnostics diagnostics;
};

/// Coordinate-wise univariate slice sampling (stepping-out + shrinkage),
/// sweeping coordinates in index order. Burn-in sweeps are discarded and
/// every `thinning`-th sweep afterwards is kept.
///
/// Throws InputError for an invalid config or an initial point of zero
/// density, SamplerStall when shrinkage exceeds max_shrink contractions.
ChainResult slice_sample(const UnnormalizedTarget& target, const ChainConfig& config);

}  // namespace metais
