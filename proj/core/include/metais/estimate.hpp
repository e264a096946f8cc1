#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include <Eigen/Core>

#include "metais/mcmc.hpp"
#include "metais/problem.hpp"
#include "metais/seed.hpp"
#include "metais/surrogate.hpp"

namespace metais {

struct EstimateResult {
  double estimate = 0.0;
  double variance = 0.0;
  /// sqrt(variance) / estimate; empty when the estimate is zero.
  std::optional<double> cov;
  std::uint64_t n_model_evals = 0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  /// Variance computed with the i.i.d. formula on correlated MCMC draws.
  bool mcmc_approximate = false;
  /// Set for estimators that run a Markov chain.
  std::optional<ChainDiagnostics> chain;

  double std_error() const;
};

/// Fills cov from estimate and variance.
EstimateResult make_estimate(double estimate, double variance, std::uint64_t n_samples,
                             std::uint64_t n_model_evals, std::uint64_t seed);

/// Mean of 1{g <= 0} over N standard normal draws, variance p(1-p)/N.
EstimateResult crude_mc(const LimitState& ls, std::uint64_t n, std::uint64_t seed);

/// Normalized instrumental density with its sampler.
struct InstrumentalDensity {
  std::function<Eigen::VectorXd(Rng&)> sample;
  std::function<double(const Eigen::VectorXd&)> log_density;
};

/// h = f. Draws the same stream as crude_mc for the same seed.
InstrumentalDensity standard_normal_instrumental(int dimension);

/// (1/N) sum 1{g <= 0} f/h with the variance
/// (1/(N-1)) ((1/N) sum 1{g <= 0} (f/h)^2 - estimate^2), clamped at zero.
/// Throws DominationError when a failing draw has zero instrumental density.
EstimateResult importance_sampling(const LimitState& ls, const InstrumentalDensity& h,
                                   std::uint64_t n, std::uint64_t seed);

/// Mean of P[G <= 0] over N standard normal draws. Costs no g-evaluations.
EstimateResult estimate_pf_eps(const Surrogate& model, std::uint64_t n, std::uint64_t seed);

/// log P[G(x) <= 0] + log phi_n(x): the quasi-optimal instrumental density
/// up to its normalizing constant p_f_eps.
UnnormalizedTarget instrumental_target(const Surrogate& model);

struct CorrectionChain {
  int burn_in = 1000;
  int thinning = 10;
  double step_width = 1.0;
  int max_step_out = 50;
  /// Sphere-uniform probes used to pick the chain's starting point.
  int start_probes = 100;
  double start_radius = 8.0;
};

/// Draws of the quasi-optimal density with their correction ratios
/// 1{g <= 0} / P[G <= 0].
struct CorrectionSample {
  Eigen::MatrixXd draws;
  Eigen::VectorXd ratios;
  ChainDiagnostics chain;
};

/// Throws EstimationError when no start point has positive failure
/// probability or the chain stalls. Costs N g-evaluations.
CorrectionSample sample_correction(const Surrogate& model, const LimitState& ls, int n_corr,
                                   const CorrectionChain& chain, std::uint64_t seed,
                                   const Eigen::MatrixXd& start_candidates = {});

/// (1/N) sum 1{g <= 0} / P[G <= 0] over N draws of the quasi-optimal
/// density. The start is the best of `start_candidates` (e.g. design
/// points) and the sphere probes. Costs N g-evaluations.
EstimateResult estimate_alpha_corr(const Surrogate& model, const LimitState& ls, int n_corr,
                                   const CorrectionChain& chain, std::uint64_t seed,
                                   const Eigen::MatrixXd& start_candidates = {});

struct MetaISConfig {
  std::uint64_t n_eps = 100000;
  int n_corr = 250;
  CorrectionChain chain;
};

struct MetaISResult {
  EstimateResult pf_eps;
  EstimateResult alpha_corr;
  double pf = 0.0;  ///< pf_eps.estimate * alpha_corr.estimate
  /// sqrt(cov_eps^2 + cov_corr^2); empty if either cov is undefined.
  std::optional<double> cov_combined;
  std::uint64_t n_eps = 0;
  int n_corr = 0;

  double std_error() const;
};

MetaISResult meta_is(const Surrogate& model, const LimitState& ls, const MetaISConfig& config,
                     std::uint64_t seed_eps, std::uint64_t seed_corr,
                     const Eigen::MatrixXd& start_candidates = {});

}  // namespace metais
