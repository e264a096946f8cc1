#include "metais/estimate.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "metais/classify.hpp"
#include "metais/errors.hpp"
#include "metais/refine.hpp"
#include "metais/sampling.hpp"

namespace metais {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Sample mean and variance of the mean (unbiased sample variance / N).
std::pair<double, double> mean_and_variance(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, ss / (n - 1.0) / n};
}

}  // namespace

double EstimateResult::std_error() const { return std::sqrt(variance); }

EstimateResult make_estimate(double estimate, double variance, std::uint64_t n_samples,
                             std::uint64_t n_model_evals, std::uint64_t seed) {
  EstimateResult out;
  out.estimate = estimate;
  out.variance = variance > 0.0 ? variance : 0.0;
  if (estimate > 0.0) out.cov = std::sqrt(out.variance) / estimate;
  out.n_samples = n_samples;
  out.n_model_evals = n_model_evals;
  out.seed = seed;
  return out;
}

EstimateResult crude_mc(const LimitState& ls, std::uint64_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("estimate", "crude_mc needs N >= 1");
  Rng rng(seed);
  std::uint64_t failures = 0;
  for (std::uint64_t k = 0; k < n; ++k) {
    if (ls.evaluate(sample_standard_normal(ls.dimension(), rng)) <= 0.0) ++failures;
  }
  const double p = static_cast<double>(failures) / static_cast<double>(n);
  return make_estimate(p, p * (1.0 - p) / static_cast<double>(n), n, n, seed);
}

InstrumentalDensity standard_normal_instrumental(int dimension) {
  return {[dimension](Rng& rng) { return sample_standard_normal(dimension, rng); },
          [](const Eigen::VectorXd& x) { return standard_normal_log_density(x); }};
}

EstimateResult importance_sampling(const LimitState& ls, const InstrumentalDensity& h,
                                   std::uint64_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("estimate", "importance_sampling needs N >= 1");
  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    const Eigen::VectorXd x = h.sample(rng);
    if (ls.evaluate(x) > 0.0) continue;
    const double log_f = standard_normal_log_density(x);
    const double log_h = h.log_density(x);
    if (log_h == kNegInf && log_f > kNegInf) {
      throw DominationError("estimate", "instrumental density is zero at a failing sample");
    }
    const double ratio = std::exp(log_f - log_h);
    if (!std::isfinite(ratio)) {
      throw DominationError("estimate", "non-finite likelihood ratio at a failing sample");
    }
    sum += ratio;
    sum_sq += ratio * ratio;
  }
  const double N = static_cast<double>(n);
  const double estimate = sum / N;
  const double spread = sum_sq / N - estimate * estimate;
  const double variance = (n > 1 && spread > 0.0) ? spread / (N - 1.0) : 0.0;
  return make_estimate(estimate, variance, n, n, seed);
}

EstimateResult estimate_pf_eps(const Surrogate& model, std::uint64_t n, std::uint64_t seed) {
  if (n < 2) throw InputError("estimate", "estimate_pf_eps needs N >= 2");
  Rng rng(seed);
  const double floor = std_floor(model);
  std::vector<double> probs(n);
  for (auto& p : probs) p = prob_failure(model.predict(sample_standard_normal(model.dimension(), rng)), floor);
  const auto [mean, variance] = mean_and_variance(probs);
  return make_estimate(mean, variance, n, 0, seed);
}

UnnormalizedTarget instrumental_target(const Surrogate& model) {
  const double floor = std_floor(model);
  return {model.dimension(), [&model, floor](const Eigen::VectorXd& x) {
            const double lp = log_prob_failure(model.predict(x), floor);
            return lp == kNegInf ? kNegInf : lp + standard_normal_log_density(x);
          }};
}

CorrectionSample sample_correction(const Surrogate& model, const LimitState& ls, int n_corr,
                                   const CorrectionChain& chain, std::uint64_t seed,
                                   const Eigen::MatrixXd& start_candidates) {
  if (n_corr < 2) throw InputError("estimate", "the correction factor needs N >= 2");
  if (ls.dimension() != model.dimension()) {
    throw InputError("estimate", "limit state and surrogate dimensions differ");
  }
  const UnnormalizedTarget target = instrumental_target(model);
  const auto start = best_start(target, start_candidates, chain.start_probes, chain.start_radius,
                                derive_seed(seed, "start"));
  if (!start) {
    throw EstimationError("estimate", "no point with positive failure probability to start the chain");
  }

  ChainConfig config;
  config.n_samples = n_corr;
  config.burn_in = chain.burn_in;
  config.thinning = chain.thinning;
  config.initial_point = *start;
  config.step_width = Eigen::VectorXd::Constant(1, chain.step_width);
  config.max_step_out = chain.max_step_out;
  config.seed = derive_seed(seed, "chain");
  ChainResult chain_out;
  try {
    chain_out = slice_sample(target, config);
  } catch (const SamplerStall& e) {
    throw EstimationError("estimate", std::string("correction chain stalled: ") + e.what());
  }

  CorrectionSample out{std::move(chain_out.draws), Eigen::VectorXd(n_corr), chain_out.diagnostics};
  const double floor = std_floor(model);
  for (int k = 0; k < n_corr; ++k) {
    const Eigen::VectorXd x = out.draws.row(k).transpose();
    const double p = prob_failure(model.predict(x), floor);
    if (p < 1e-12) {
      throw EstimationError("estimate", "internal: correction draw with failure probability " +
                                            std::to_string(p));
    }
    out.ratios[k] = ls.evaluate(x) <= 0.0 ? 1.0 / p : 0.0;
  }
  return out;
}

EstimateResult estimate_alpha_corr(const Surrogate& model, const LimitState& ls, int n_corr,
                                   const CorrectionChain& chain, std::uint64_t seed,
                                   const Eigen::MatrixXd& start_candidates) {
  const CorrectionSample sample =
      sample_correction(model, ls, n_corr, chain, seed, start_candidates);
  const std::vector<double> ratios(sample.ratios.data(), sample.ratios.data() + sample.ratios.size());
  const auto [mean, variance] = mean_and_variance(ratios);
  EstimateResult out = make_estimate(mean, variance, n_corr, n_corr, seed);
  out.mcmc_approximate = true;
  out.chain = sample.chain;
  return out;
}

double MetaISResult::std_error() const { return cov_combined ? pf * *cov_combined : 0.0; }

MetaISResult meta_is(const Surrogate& model, const LimitState& ls, const MetaISConfig& config,
                     std::uint64_t seed_eps, std::uint64_t seed_corr,
                     const Eigen::MatrixXd& start_candidates) {
  MetaISResult out;
  out.n_eps = config.n_eps;
  out.n_corr = config.n_corr;
  out.pf_eps = estimate_pf_eps(model, config.n_eps, seed_eps);
  out.alpha_corr =
      estimate_alpha_corr(model, ls, config.n_corr, config.chain, seed_corr, start_candidates);
  out.pf = out.pf_eps.estimate * out.alpha_corr.estimate;
  if (out.pf_eps.cov && out.alpha_corr.cov) {
    out.cov_combined = std::hypot(*out.pf_eps.cov, *out.alpha_corr.cov);
  }
  return out;
}

}  // namespace metais
