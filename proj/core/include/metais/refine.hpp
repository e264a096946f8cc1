#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "metais/classify.hpp"
#include "metais/kriging.hpp"
#include "metais/mcmc.hpp"
#include "metais/problem.hpp"

namespace metais {

struct RefinementConfig {
  MarginSpec margin;
  double beta0 = 8.0;            ///< radius of the sampling hypersphere
  int n_candidates = 10000;      ///< slice-sampler draws per iteration
  int points_per_iteration = 10; ///< K
  int budget = 100;              ///< total g-evaluations, initial design included
  int burn_in = 1000;
  int thinning = 5;
  double step_width = 1.0;
  int max_step_out = 50;
  int probe_count = 10000;       ///< sphere-uniform points of the margin-mass diagnostic
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
};

struct RefinementRecord {
  int iteration = 0;
  Eigen::Index doe_size = 0;
  double margin_mass = 0.0;  ///< probe fraction with prob_in_margin > 0.5
  Eigen::VectorXd lengths;
  double wall_time_ms = 0.0;
};

struct RefinementTrace {
  RefinementRecord initial;  ///< state before the first iteration
  std::vector<RefinementRecord> iterations;
  bool margin_converged = false;
  ChainDiagnostics last_chain;
};

/// "iteration,doe_size,margin_mass,wall_time_ms"; the initial state is row 0.
void write_trace_csv(std::ostream& out, const RefinementTrace& trace);
void write_trace_csv(const std::string& path, const RefinementTrace& trace);

/// log of the unnormalized uniform density on the beta0-ball: 0 inside
/// (boundary included), -inf outside.
double weight_density_log(const Eigen::Ref<const Eigen::VectorXd>& u, double beta0);

/// log P[u in margin] + weight_density_log(u, beta0).
double criterion_log(const Surrogate& model, const MarginSpec& spec, double beta0,
                     const Eigen::Ref<const Eigen::VectorXd>& u);

/// Lloyd's algorithm from k-means++ seeding; stops at an assignment fixpoint
/// or after 100 iterations. Empty clusters are reseeded at the point farthest
/// from the current centers. Throws InputError when rows < k.
Eigen::MatrixXd kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed);

/// Fraction of probe points with prob_in_margin > 0.5.
double margin_mass(const Surrogate& model, const MarginSpec& spec, const Eigen::MatrixXd& probes);

struct RefinementStep {
  KrigingModel model;
  Eigen::MatrixXd points;  ///< evaluated centers (rows)
  Eigen::VectorXd values;
  bool margin_converged = false;
  ChainDiagnostics chain;
};

/// One enrichment: sample the margin criterion, condense the draws to K
/// centers, evaluate g at the centers that respect the design separation,
/// refit. When the margin is numerically empty nothing is evaluated and
/// margin_converged is set.
RefinementStep refine_once(const KrigingModel& model, const LimitState& ls,
                           const RefinementConfig& config);

struct RefinementOutcome {
  KrigingModel model;
  RefinementTrace trace;
};

/// Repeats refine_once until the budget is spent or the margin is empty.
/// The last iteration shrinks K to the remaining budget.
RefinementOutcome refine_until_budget(const KrigingModel& model, const LimitState& ls,
                                      const RefinementConfig& config);

/// Point maximizing log_density among the candidates and `probes`
/// sphere-uniform draws; nullopt when all have zero density.
std::optional<Eigen::VectorXd> best_start(const UnnormalizedTarget& target,
                                          const Eigen::MatrixXd& candidates, int probes,
                                          double radius, std::uint64_t seed);

}  // namespace metais
