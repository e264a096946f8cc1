#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <atomic>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "metais/errors.hpp"
#include "metais/kriging.hpp"
#include "metais/sampling.hpp"
#include "test_support.hpp"

using namespace metais;

namespace {

DesignOfExperiments three_point_doe() {
  Eigen::MatrixXd x(3, 1);
  x << -1.0, 0.0, 1.0;
  Eigen::VectorXd y(3);
  y << 1.0, 0.0, 1.0;
  return {x, y};
}

// Smooth test function on R^n.
double bumpy(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) s += std::sin(1.3 * x[k] + 0.2 * k) + 0.1 * x[k] * x[k];
  return s;
}

DesignOfExperiments random_doe(int m, int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x = sample_uniform_ball(m, n, 3.0, rng);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) y[i] = bumpy(x.row(i).transpose());
  return {x, y};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Correlation, Values) {
  EXPECT_DOUBLE_EQ(correlation(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Constant(3, 0.7)), 1.0);
  EXPECT_NEAR(correlation(Eigen::VectorXd::Constant(1, 2.5), Eigen::VectorXd::Constant(1, 2.5)),
              0.36787944117144233, 1e-15);
  Eigen::VectorXd l(2);
  l << 0.5, 3.0;
  EXPECT_NEAR(correlation(l, l), std::exp(-2.0), 1e-15);
  l[1] = 0.0;
  EXPECT_THROW(correlation(Eigen::VectorXd::Zero(2), l), ConfigError);
}

TEST(Doe, Validation) {
  EXPECT_THROW(DesignOfExperiments(Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1)), InputError);
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1e-9;
  EXPECT_THROW(DesignOfExperiments(x, Eigen::VectorXd::Zero(2)), InputError);
  x << 0.0, 1.0;
  Eigen::VectorXd y(2);
  y << 0.0, std::nan("");
  EXPECT_THROW(DesignOfExperiments(x, y), InputError);
  EXPECT_THROW(DesignOfExperiments(x, Eigen::VectorXd::Zero(3)), InputError);
}

TEST(Doe, CsvRoundTrip) {
  const DesignOfExperiments doe = random_doe(7, 3, 4);
  std::stringstream ss;
  write_doe_csv(ss, doe);
  EXPECT_EQ(ss.str().substr(0, 11), "x1,x2,x3,g\n");
  const DesignOfExperiments back = read_doe_csv(ss);
  EXPECT_EQ(back.points(), doe.points());
  EXPECT_EQ(back.values(), doe.values());
  std::stringstream headless("0,1\n1,2\n");
  EXPECT_THROW(read_doe_csv(headless), InputError);
}

TEST(FitGivenLengths, ConstantData) {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 0, 0, 1, 1, 1;
  const DesignOfExperiments doe(x, Eigen::VectorXd::Constant(4, 2.5));
  const LikelihoodFit fit = fit_given_lengths(doe, RegressionBasis::constant(), Eigen::VectorXd::Ones(2));
  EXPECT_NEAR(fit.beta[0], 2.5, 1e-12);
  EXPECT_EQ(fit.process_variance, 0.0);
}

TEST(FitGivenLengths, ThreePointOracle) {
  // Frozen from a 50-digit evaluation of the same formulas with tau = 1e-10.
  const DesignOfExperiments doe = three_point_doe();
  const LikelihoodFit fit = fit_given_lengths(doe, RegressionBasis::constant(), Eigen::VectorXd::Ones(1));
  ASSERT_EQ(fit.nugget, 1e-10);
  EXPECT_LE(rel(fit.beta[0], 0.81732793837938006953), 1e-10);
  EXPECT_LE(rel(fit.process_variance, 0.43099792006171961129), 1e-10);
  EXPECT_LE(rel(fit.neg_log_likelihood, -1.4171342031952586951), 1e-10);

  const auto dense = fixtures::dense_kriging(
      doe.points(), doe.values(), [](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(1); },
      Eigen::VectorXd::Ones(1), fit.nugget, Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_LE(rel(fit.beta[0], dense.beta[0]), 1e-10);
  EXPECT_LE(rel(fit.process_variance, dense.process_variance), 1e-10);
}

TEST(FitGivenLengths, ExactRegression) {
  Rng rng(3);
  const Eigen::MatrixXd x = sample_uniform_ball(8, 2, 2.0, rng);
  Eigen::Vector3d b0(1.5, -2.0, 0.25);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) y[i] = b0[0] + b0[1] * x(i, 0) + b0[2] * x(i, 1);
  const LikelihoodFit fit =
      fit_given_lengths({x, y}, RegressionBasis::linear(2), Eigen::VectorXd::Ones(2));
  EXPECT_LE((fit.beta - b0).norm(), 1e-8);
  EXPECT_EQ(fit.process_variance, 0.0);
}

TEST(FitGivenLengths, Errors) {
  const DesignOfExperiments doe = three_point_doe();
  EXPECT_THROW(fit_given_lengths(doe, RegressionBasis::constant(), Eigen::VectorXd::Ones(2)), Error);
  Eigen::MatrixXd x(3, 3);
  x << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  EXPECT_THROW(fit_given_lengths({x, Eigen::Vector3d(1, 2, 3)}, RegressionBasis::linear(3),
                                 Eigen::VectorXd::Ones(3)),
               IdentifiabilityError);
  // With no nugget allowed, near-unit correlations cannot be factorized.
  const DesignOfExperiments close = random_doe(20, 1, 9);
  EXPECT_THROW(fit_given_lengths(close, RegressionBasis::constant(), Eigen::VectorXd::Constant(1, 1e4),
                                 NuggetSchedule{0.0, 10.0, 0.0}),
               ConditioningError);
}

TEST(LikelihoodGradient, MatchesFiniteDifferences) {
  const DesignOfExperiments doe = random_doe(25, 3, 11);
  const RegressionBasis basis = RegressionBasis::linear(3);
  Eigen::VectorXd lengths(3);
  lengths << 0.8, 1.6, 2.4;
  const LikelihoodGradient g = profiled_likelihood_gradient(doe, basis, lengths);
  EXPECT_NEAR(g.value, fit_given_lengths(doe, basis, lengths).neg_log_likelihood, 1e-10);
  const double h = 1e-5;
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd up = lengths, dn = lengths;
    up[k] *= std::exp(h);
    dn[k] *= std::exp(-h);
    const double fd = (fit_given_lengths(doe, basis, up).neg_log_likelihood -
                       fit_given_lengths(doe, basis, dn).neg_log_likelihood) /
                      (2.0 * h);
    EXPECT_NEAR(g.gradient[k], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "coordinate " << k;
  }
}

TEST(Fit, RecoversLengthsOfSampledProcess) {
  const int m = 50;
  Rng rng(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  Eigen::MatrixXd x(m, 2);
  for (int i = 0; i < m; ++i) x.row(i) << u(rng), u(rng);
  Eigen::Vector2d truth(0.9, 2.0);
  Eigen::MatrixXd R(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) R(i, j) = correlation((x.row(i) - x.row(j)).transpose(), truth);
  R.diagonal().array() += 1e-10;
  const Eigen::MatrixXd L = R.llt().matrixL();
  const Eigen::VectorXd y = 3.0 + 1.5 * (L * sample_standard_normal(m, rng)).array();

  const KrigingModel model = KrigingModel::fit({x, y}, RegressionBasis::constant());
  for (int k = 0; k < 2; ++k) {
    const double ratio = model.lengths()[k] / truth[k];
    EXPECT_GT(ratio, 0.5) << k;
    EXPECT_LT(ratio, 2.0) << k;
  }
}

TEST(Fit, ConstantDataSucceeds) {
  Rng rng(5);
  const Eigen::MatrixXd x = sample_uniform_ball(10, 2, 2.0, rng);
  const KrigingModel model = KrigingModel::fit({x, Eigen::VectorXd::Constant(10, -4.0)},
                                               RegressionBasis::constant());
  EXPECT_EQ(model.process_variance(), 0.0);
  Rng q(6);
  for (int i = 0; i < 20; ++i) {
    const Prediction p = model.predict(sample_uniform_ball(2, 5.0, q));
    EXPECT_NEAR(p.mean, -4.0, 1e-12);
    EXPECT_EQ(p.std, 0.0);
  }
}

TEST(Fit, CollapsedBounds) {
  const DesignOfExperiments doe = random_doe(15, 2, 8);
  FitOptions options;
  const Eigen::Vector2d l0(0.7, 1.9);
  options.bounds = LengthBounds{l0, l0};
  const KrigingModel model = KrigingModel::fit(doe, RegressionBasis::constant(), options);
  EXPECT_EQ(model.lengths(), Eigen::VectorXd(l0));
}

TEST(Fit, LikelihoodNotWorseThanRandomProbes) {
  const DesignOfExperiments doe = random_doe(30, 2, 12);
  const KrigingModel model = KrigingModel::fit(doe, RegressionBasis::constant());
  const LengthBounds box = LengthBounds::from_design(doe);
  Rng rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd l(2);
    for (int k = 0; k < 2; ++k) {
      l[k] = std::exp(std::log(box.lower[k]) + u(rng) * (std::log(box.upper[k]) - std::log(box.lower[k])));
    }
    double probe = std::numeric_limits<double>::infinity();
    try {
      probe = fit_given_lengths(doe, RegressionBasis::constant(), l).neg_log_likelihood;
    } catch (const ConditioningError&) {
    }
    EXPECT_LE(model.neg_log_likelihood(), probe + 1e-9);
  }
}

TEST(Predict, InterpolatesDesign) {
  for (int n : {1, 2, 5}) {
    const DesignOfExperiments doe = random_doe(25, n, 20 + n);
    const KrigingModel model = KrigingModel::fit(doe, RegressionBasis::constant());
    for (Eigen::Index i = 0; i < doe.size(); ++i) {
      const Prediction p = model.predict(doe.points().row(i).transpose());
      EXPECT_LE(std::abs(p.mean - doe.values()[i]), 1e-8 * (1.0 + std::abs(doe.values()[i])));
      EXPECT_LE(p.std, 1e-6 * model.process_std());
    }
  }
}

TEST(Predict, ThreePointOracle) {
  const KrigingModel model = KrigingModel::fit_with_lengths(three_point_doe(), RegressionBasis::constant(),
                                                            Eigen::VectorXd::Ones(1));
  const Prediction p = model.predict(Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_LE(rel(p.mean, 0.38197593175348154206), 1e-10);
  EXPECT_LE(rel(p.std * p.std, 0.042492121771469971839), 1e-10);
}

TEST(Predict, NonNegativeVariance) {
  const DesignOfExperiments doe = random_doe(30, 2, 31);
  const KrigingModel model = KrigingModel::fit(doe, RegressionBasis::linear(2));
  Rng rng(32);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::VectorXd x = sample_uniform_ball(2, 8.0, rng);
    EXPECT_GE(model.predict(x).std, 0.0);
    EXPECT_GE(model.predict_raw(x).std, 0.0);
  }
  // Midpoints between design points are where round-off can go negative.
  for (Eigen::Index i = 1; i < doe.size(); ++i) {
    const Eigen::VectorXd x = 0.5 * (doe.points().row(i) + doe.points().row(i - 1)).transpose();
    EXPECT_GE(model.predict(x).std, 0.0);
  }
}

TEST(Predict, PermutationInvariant) {
  const DesignOfExperiments doe = random_doe(20, 2, 41);
  std::vector<int> order(20);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), Rng(42));
  Eigen::MatrixXd xp(20, 2);
  Eigen::VectorXd yp(20);
  for (int i = 0; i < 20; ++i) {
    xp.row(i) = doe.points().row(order[i]);
    yp[i] = doe.values()[order[i]];
  }
  const Eigen::Vector2d l(1.1, 0.8);
  const KrigingModel a = KrigingModel::fit_with_lengths(doe, RegressionBasis::linear(2), l);
  const KrigingModel b = KrigingModel::fit_with_lengths({xp, yp}, RegressionBasis::linear(2), l);
  Rng rng(43);
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd x = sample_uniform_ball(2, 4.0, rng);
    const Prediction pa = a.predict(x), pb = b.predict(x);
    EXPECT_NEAR(pa.mean, pb.mean, 1e-10 * std::max(1.0, std::abs(pa.mean)));
    EXPECT_NEAR(pa.std, pb.std, 1e-10 * std::max(1.0, pa.std));
  }
}

TEST(Predict, DenseOracleLinearBasis) {
  const DesignOfExperiments doe = random_doe(12, 2, 51);
  const Eigen::Vector2d l(1.3, 0.9);
  const KrigingModel model = KrigingModel::fit_with_lengths(doe, RegressionBasis::linear(2), l);
  const Eigen::Vector2d q(0.3, -0.7);
  const auto dense = fixtures::dense_kriging(
      doe.points(), doe.values(),
      [](const Eigen::VectorXd& x) {
        Eigen::VectorXd f(3);
        f << 1.0, x[0], x[1];
        return f;
      },
      l, model.nugget(), q);
  const Prediction p = model.predict(q);
  EXPECT_LE(rel(p.mean, dense.mean), 1e-10);
  EXPECT_LE(rel(p.std * p.std, dense.variance), 1e-10);
  EXPECT_LE(rel(model.process_variance(), dense.process_variance), 1e-10);
}

TEST(Predict, ChecksDimension) {
  const KrigingModel model = KrigingModel::fit_with_lengths(three_point_doe(), RegressionBasis::constant(),
                                                            Eigen::VectorXd::Ones(1));
  EXPECT_THROW(model.predict(Eigen::VectorXd::Zero(2)), InputError);
}

TEST(AddPoints, EmptySetKeepsModel) {
  const KrigingModel model = KrigingModel::fit(random_doe(15, 2, 61), RegressionBasis::constant());
  const Enrichment e = add_points(model, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
  EXPECT_TRUE(e.noop);
  EXPECT_EQ(e.model.doe().size(), 15);
  EXPECT_EQ(e.model.lengths(), model.lengths());
}

TEST(AddPoints, FarPointIsInterpolated) {
  const KrigingModel model = KrigingModel::fit(random_doe(15, 2, 62), RegressionBasis::constant());
  Eigen::MatrixXd x(1, 2);
  x << 6.0, -5.0;
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, bumpy(x.row(0).transpose()));
  const Enrichment e = add_points(model, x, y);
  EXPECT_FALSE(e.noop);
  EXPECT_EQ(e.model.doe().size(), 16);
  EXPECT_NEAR(e.model.predict(x.row(0).transpose()).mean, y[0], 1e-8 * (1.0 + std::abs(y[0])));
}

TEST(AddPoints, DuplicateIsDropped) {
  const DesignOfExperiments doe = random_doe(15, 2, 63);
  const KrigingModel model = KrigingModel::fit(doe, RegressionBasis::constant());
  const Eigen::MatrixXd x = doe.points().topRows(1);
  const Enrichment e = add_points(model, x, doe.values().head(1));
  EXPECT_TRUE(e.noop);
  ASSERT_EQ(e.dropped.size(), 1u);
  EXPECT_EQ(e.model.doe().size(), 15);
}

TEST(Model, SharedAcrossThreads) {
  const KrigingModel model = KrigingModel::fit(random_doe(20, 2, 71), RegressionBasis::constant());
  const Eigen::Vector2d x(0.4, 0.4);
  const Prediction ref = model.predict(x);
  std::vector<std::thread> pool;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&] {
      for (int i = 0; i < 500; ++i) {
        const Prediction p = model.predict(x);
        if (p.mean != ref.mean || p.std != ref.std) ++mismatches;
      }
    });
  }
  for (auto& th : pool) th.join();
  EXPECT_EQ(mismatches.load(), 0);
}
