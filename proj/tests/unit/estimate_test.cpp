#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "metais/errors.hpp"
#include "metais/estimate.hpp"
#include "metais/normal.hpp"
#include "metais/pipeline.hpp"
#include "metais/sampling.hpp"
#include "test_support.hpp"

using namespace metais;

namespace {
constexpr double kPhiMinus3 = 1.349898031630094e-3;

LimitState constant_limit_state(double value, int dimension = 2) {
  return LimitState("constant", dimension, [value](const Eigen::VectorXd&) { return value; });
}

// f restricted to u1 >= beta, sampled by inverse CDF of the tail.
InstrumentalDensity optimal_linear_density(double beta, int dimension) {
  const double tail = normal_cdf(-beta);
  InstrumentalDensity h;
  h.sample = [beta, tail, dimension](Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd u = sample_standard_normal(dimension, rng);
    u[0] = std::max(beta, -normal_quantile(unif(rng) * tail));
    return u;
  };
  h.log_density = [beta, tail](const Eigen::VectorXd& u) {
    if (u[0] < beta) return -std::numeric_limits<double>::infinity();
    return standard_normal_log_density(u) - std::log(tail);
  };
  return h;
}
}  // namespace

TEST(CrudeMc, Degenerate) {
  const EstimateResult always = crude_mc(constant_limit_state(-1.0), 1000, 1);
  EXPECT_EQ(always.estimate, 1.0);
  EXPECT_EQ(always.variance, 0.0);
  const EstimateResult never = crude_mc(constant_limit_state(1.0), 1000, 1);
  EXPECT_EQ(never.estimate, 0.0);
  EXPECT_FALSE(never.cov.has_value());
  EXPECT_EQ(never.n_model_evals, 1000u);
}

TEST(CrudeMc, LinearBenchmark) {
  const LimitState ls = make_linear(3.0, 2);
  const std::uint64_t n = 1000000;
  const EstimateResult r = crude_mc(ls, n, 2);
  EXPECT_NEAR(r.estimate, kPhiMinus3, 3.0 * std::sqrt(kPhiMinus3 * (1 - kPhiMinus3) / n));
  EXPECT_DOUBLE_EQ(r.variance, r.estimate * (1.0 - r.estimate) / n);
  EXPECT_EQ(ls.eval_count(), n);
  ASSERT_TRUE(r.cov.has_value());
  EXPECT_DOUBLE_EQ(*r.cov, std::sqrt(r.variance) / r.estimate);
}

TEST(ImportanceSampling, IdentityMatchesCrudeMc) {
  const LimitState ls = make_parabola(3.0);
  const EstimateResult mc = crude_mc(ls, 20000, 9);
  const EstimateResult is = importance_sampling(ls, standard_normal_instrumental(2), 20000, 9);
  EXPECT_EQ(is.estimate, mc.estimate);
}

TEST(ImportanceSampling, OptimalDensityHasZeroVariance) {
  const LimitState ls = make_linear(3.0, 2);
  const EstimateResult r = importance_sampling(ls, optimal_linear_density(3.0, 2), 1000, 4);
  EXPECT_NEAR(r.estimate, kPhiMinus3, 1e-12);
  EXPECT_LT(r.variance, 1e-20);
}

TEST(ImportanceSampling, SingleSampleClamp) {
  const LimitState ls = constant_limit_state(-1.0, 1);
  InstrumentalDensity h;
  h.sample = [](Rng&) { return Eigen::VectorXd::Constant(1, 0.3); };
  h.log_density = [](const Eigen::VectorXd& u) { return standard_normal_log_density(u) + std::log(2.0); };
  const EstimateResult r = importance_sampling(ls, h, 1, 1);
  EXPECT_DOUBLE_EQ(r.estimate, 0.5);
  EXPECT_EQ(r.variance, 0.0);
}

TEST(ImportanceSampling, DominationViolation) {
  const LimitState ls = constant_limit_state(-1.0, 1);
  InstrumentalDensity h;
  h.sample = [](Rng&) { return Eigen::VectorXd::Constant(1, 0.3); };
  h.log_density = [](const Eigen::VectorXd&) { return -std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(importance_sampling(ls, h, 10, 1), DominationError);
}

TEST(PfEps, SyntheticSurrogates) {
  const fixtures::ConstantSurrogate half(2, {0.0, 1.0});
  const EstimateResult r = estimate_pf_eps(half, 5000, 3);
  EXPECT_DOUBLE_EQ(r.estimate, 0.5);
  EXPECT_EQ(r.n_model_evals, 0u);

  const LimitState ls = make_parabola(3.0);
  const auto perfect = fixtures::perfect_surrogate("parabola2d", {{"b", 3.0}});
  const EstimateResult eps = estimate_pf_eps(perfect, 50000, 8);
  const EstimateResult mc = crude_mc(ls, 50000, 8);
  EXPECT_EQ(eps.estimate, mc.estimate);
}

TEST(InstrumentalTarget, Values) {
  const fixtures::FunctionSurrogate s(2, [](const Eigen::VectorXd& x) { return x[0] > 0 ? 1.0 : -1.0; });
  const UnnormalizedTarget t = instrumental_target(s);
  EXPECT_EQ(t.log_density(Eigen::Vector2d(1.0, 0.0)), -std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(t.log_density(Eigen::Vector2d(-1.0, 0.5)),
                   standard_normal_log_density(Eigen::Vector2d(-1.0, 0.5)));

  const fixtures::FunctionSurrogate g(2, [](const Eigen::VectorXd& x) { return x[0] > 0 ? 0.0 : 1.0; }, 1.0);
  const UnnormalizedTarget tg = instrumental_target(g);
  const double z = normal_quantile(0.75);
  const fixtures::FunctionSurrogate q(2, [z](const Eigen::VectorXd& x) { return x[0] > 0 ? 0.0 : z; }, 1.0);
  const UnnormalizedTarget tq = instrumental_target(q);
  // Same f at (1, 0) and (-1, 0); P = 0.5 vs 0.25.
  EXPECT_NEAR(tq.log_density(Eigen::Vector2d(1, 0)) - tq.log_density(Eigen::Vector2d(-1, 0)), std::log(2.0),
              1e-12);
  EXPECT_NEAR(tg.log_density(Eigen::Vector2d(1, 0)), std::log(0.5) + standard_normal_log_density(Eigen::Vector2d(1, 0)),
              1e-12);
}

TEST(AlphaCorr, PerfectSurrogateIsUnity) {
  const LimitState ls = make_parabola();
  const auto perfect = fixtures::perfect_surrogate("parabola2d");
  CorrectionChain chain;
  chain.burn_in = 200;
  const EstimateResult r = estimate_alpha_corr(perfect, ls, 200, chain, 5);
  EXPECT_EQ(r.estimate, 1.0);
  EXPECT_EQ(r.variance, 0.0);
  EXPECT_TRUE(r.mcmc_approximate);
  EXPECT_EQ(r.n_model_evals, 200u);
  EXPECT_EQ(ls.eval_count(), 200u);
  ASSERT_TRUE(r.chain.has_value());
  EXPECT_EQ(r.chain->kept, 200);
}

TEST(AlphaCorr, HalfProbabilityGivesTwo) {
  const LimitState ls = constant_limit_state(-1.0);
  const fixtures::ConstantSurrogate half(2, {0.0, 1.0});
  CorrectionChain chain;
  chain.burn_in = 50;
  const EstimateResult r = estimate_alpha_corr(half, ls, 100, chain, 6);
  EXPECT_EQ(r.estimate, 2.0);
  EXPECT_EQ(r.variance, 0.0);
}

TEST(AlphaCorr, RatiosAreZeroOrAtLeastOne) {
  const LimitState ls = make_parabola();
  const fixtures::FunctionSurrogate rough(
      2, [](const Eigen::VectorXd& x) { return 4.8 - x[1] - 0.45 * (x[0] - 0.1) * (x[0] - 0.1); }, 0.4);
  CorrectionChain chain;
  chain.burn_in = 200;
  const CorrectionSample s = sample_correction(rough, ls, 500, chain, 7);
  int zeros = 0;
  for (Eigen::Index i = 0; i < s.ratios.size(); ++i) {
    if (s.ratios[i] == 0.0) {
      ++zeros;
    } else {
      EXPECT_GE(s.ratios[i], 1.0);
    }
  }
  EXPECT_GT(zeros, 0);
  EXPECT_LT(zeros, 500);
}

TEST(AlphaCorr, Errors) {
  const LimitState ls = make_parabola();
  const fixtures::ConstantSurrogate safe(2, {1.0, 0.0});
  EXPECT_THROW(estimate_alpha_corr(safe, ls, 10, CorrectionChain{}, 1), EstimationError);
  EXPECT_THROW(estimate_alpha_corr(safe, ls, 1, CorrectionChain{}, 1), InputError);
  EXPECT_EQ(ls.eval_count(), 0u);
}

TEST(MetaIs, ProductIdentityAndPerfectLimit) {
  const LimitState ls = make_parabola();
  const auto perfect = fixtures::perfect_surrogate("parabola2d");
  MetaISConfig config;
  config.n_eps = 200000;
  config.n_corr = 100;
  config.chain.burn_in = 100;
  const MetaISResult r = meta_is(perfect, ls, config, 11, 12);
  EXPECT_EQ(r.pf, r.pf_eps.estimate * r.alpha_corr.estimate);
  EXPECT_EQ(r.pf, r.pf_eps.estimate);
  ASSERT_TRUE(r.cov_combined.has_value());
  EXPECT_EQ(*r.cov_combined, *r.pf_eps.cov);
  EXPECT_EQ(r.n_eps, 200000u);
  EXPECT_EQ(r.n_corr, 100);
}

TEST(MetaIs, HalfTimesUnity) {
  // g always fails, so alpha undoes whatever the surrogate gets wrong.
  const LimitState ls = constant_limit_state(-1.0);
  const fixtures::ConstantSurrogate always(2, {-1.0, 0.0});
  MetaISConfig config;
  config.n_eps = 1000;
  config.n_corr = 20;
  config.chain.burn_in = 10;
  const MetaISResult r = meta_is(always, ls, config, 1, 2);
  EXPECT_EQ(r.pf_eps.estimate, 1.0);
  EXPECT_EQ(r.alpha_corr.estimate, 1.0);
  EXPECT_EQ(r.pf, 1.0);

  const fixtures::ConstantSurrogate half(2, {0.0, 1.0});
  const MetaISResult h = meta_is(half, ls, config, 1, 2);
  EXPECT_EQ(h.pf_eps.estimate, 0.5);
  EXPECT_EQ(h.alpha_corr.estimate, 2.0);
  EXPECT_EQ(h.pf, 1.0);
}

TEST(MetaIs, RefinedParabolaAgreesWithOracle) {
  const auto oracle = fixtures::oracle_table()["parabola2d"]["crude_mc"];
  const double pf_ref = oracle["pf"], se_ref = oracle["std_error"];
  RunConfig config = default_run_config("parabola2d");
  config.seed = 21;
  config.estimation.n_corr = 500;
  const LimitState ls = make_parabola();
  const RunResult r = run_pipeline(config, ls);
  const double se_eps = r.meta.pf_eps.std_error();
  EXPECT_LE(std::abs(r.meta.pf_eps.estimate - pf_ref), 3.0 * std::hypot(se_eps, se_ref));
  EXPECT_GE(r.meta.alpha_corr.estimate, 0.5);
  EXPECT_LE(r.meta.alpha_corr.estimate, 2.0);
  EXPECT_LE(std::abs(r.meta.pf - pf_ref), 3.0 * std::hypot(r.meta.std_error(), se_ref));
}
