#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "kriging_internal.hpp"
#include "metais/errors.hpp"

namespace metais {

// DesignOfExperiments -------------------------------------------------------

DesignOfExperiments::DesignOfExperiments(Eigen::MatrixXd points, Eigen::VectorXd values,
                                         double min_separation)
    : points_(std::move(points)), values_(std::move(values)), min_separation_(min_separation) {
  if (points_.rows() < 2) throw InputError("kriging", "design needs at least 2 points");
  if (points_.cols() < 1) throw InputError("kriging", "design points have no coordinates");
  if (values_.size() != points_.rows()) {
    throw InputError("kriging", "design has " + std::to_string(points_.rows()) + " points but " +
                                    std::to_string(values_.size()) + " values");
  }
  if (!(min_separation_ >= 0.0)) throw ConfigError("kriging", "negative minimum separation");
  if (!points_.allFinite()) throw InputError("kriging", "non-finite design coordinate");
  if (!values_.allFinite()) throw InputError("kriging", "non-finite design value");
  const double limit = min_separation_ * min_separation_;
  for (Eigen::Index i = 1; i < points_.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if ((points_.row(i) - points_.row(j)).squaredNorm() < limit ||
          points_.row(i) == points_.row(j)) {
        throw InputError("kriging", "design points " + std::to_string(j) + " and " +
                                        std::to_string(i) + " violate the minimum separation");
      }
    }
  }
}

std::optional<Eigen::Index> DesignOfExperiments::find_near(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::Index best = -1;
  const double d2 = (points_.rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff(&best);
  if (d2 <= min_separation_ * min_separation_) return best;
  return std::nullopt;
}

std::vector<Eigen::Index> DesignOfExperiments::separated_candidates(
    const Eigen::MatrixXd& candidates) const {
  std::vector<Eigen::Index> kept;
  if (candidates.rows() == 0) return kept;
  if (candidates.cols() != points_.cols()) {
    throw InputError("kriging", "candidate dimension does not match the design");
  }
  const double limit = min_separation_ * min_separation_;
  auto too_close = [limit](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double d2 = (a - b).squaredNorm();
    return d2 < limit || d2 == 0.0;
  };
  for (Eigen::Index c = 0; c < candidates.rows(); ++c) {
    const Eigen::VectorXd x = candidates.row(c).transpose();
    if (!x.allFinite()) continue;
    bool ok = true;
    for (Eigen::Index i = 0; ok && i < points_.rows(); ++i) {
      ok = !too_close(x, points_.row(i).transpose());
    }
    for (Eigen::Index k : kept) {
      if (!ok) break;
      ok = !too_close(x, candidates.row(k).transpose());
    }
    if (ok) kept.push_back(c);
  }
  return kept;
}

// RegressionBasis -----------------------------------------------------------

RegressionBasis::RegressionBasis(std::string name, int size, Function f)
    : name_(std::move(name)), size_(size), f_(std::move(f)) {
  if (size_ < 1) throw ConfigError("kriging", "regression basis needs at least one function");
}

RegressionBasis RegressionBasis::constant() {
  return RegressionBasis("constant", 1, [](const Eigen::Ref<const Eigen::VectorXd>&) {
    return Eigen::VectorXd::Ones(1).eval();
  });
}

RegressionBasis RegressionBasis::linear(int dimension) {
  return RegressionBasis("linear", dimension + 1,
                         [dimension](const Eigen::Ref<const Eigen::VectorXd>& x) {
                           Eigen::VectorXd f(dimension + 1);
                           f[0] = 1.0;
                           f.tail(dimension) = x;
                           return f;
                         });
}

RegressionBasis RegressionBasis::custom(std::string name, int size, Function f) {
  return RegressionBasis(std::move(name), size, std::move(f));
}

RegressionBasis RegressionBasis::by_name(const std::string& name, int dimension) {
  if (name == "constant") return constant();
  if (name == "linear") return linear(dimension);
  throw ConfigError("kriging", "unknown regression basis '" + name + "'");
}

Eigen::VectorXd RegressionBasis::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd f = f_(x);
  if (f.size() != size_) throw ConfigError("kriging", "basis '" + name_ + "' returned wrong size");
  return f;
}

Eigen::MatrixXd RegressionBasis::design_matrix(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd F(points.rows(), size_);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    F.row(i) = evaluate(points.row(i).transpose()).transpose();
  }
  return F;
}

// Correlation and generalized least squares ---------------------------------

double correlation(const Eigen::Ref<const Eigen::VectorXd>& dx,
                   const Eigen::Ref<const Eigen::VectorXd>& lengths) {
  if (dx.size() != lengths.size()) throw InputError("kriging", "correlation: dimension mismatch");
  if (!(lengths.array() > 0.0).all()) {
    throw ConfigError("kriging", "correlation lengths must be positive");
  }
  return std::exp(-dx.cwiseQuotient(lengths).squaredNorm());
}

namespace detail {

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& scaled_points) {
  const Eigen::Index m = scaled_points.rows();
  Eigen::MatrixXd R(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    R(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < m; ++i) {
      const double v = std::exp(-(scaled_points.row(i) - scaled_points.row(j)).squaredNorm());
      R(i, j) = v;
      R(j, i) = v;
    }
  }
  return R;
}

GlsSolution solve_gls(const Eigen::MatrixXd& correlation, const Eigen::MatrixXd& basis_matrix,
                      const Eigen::VectorXd& values, const NuggetSchedule& nugget) {
  const Eigen::Index m = correlation.rows();
  const Eigen::Index p = basis_matrix.cols();
  if (p > m - 1) {
    throw IdentifiabilityError("kriging", "basis size " + std::to_string(p) +
                                              " exceeds design size minus one (" +
                                              std::to_string(m - 1) + ")");
  }

  GlsSolution out;
  bool factored = false;
  for (double tau = nugget.start; tau <= nugget.max * (1.0 + 1e-12); tau *= nugget.factor) {
    Eigen::MatrixXd A = correlation;
    A.diagonal().array() += tau;
    out.chol.compute(A);
    if (out.chol.info() == Eigen::Success && out.chol.matrixLLT().diagonal().allFinite() &&
        (out.chol.matrixLLT().diagonal().array() > 0.0).all() && out.chol.rcond() > 1e-14) {
      out.nugget = tau;
      factored = true;
      break;
    }
    if (nugget.factor <= 1.0 || tau <= 0.0) break;
  }
  if (!factored) {
    throw ConditioningError("kriging", "correlation matrix not positive definite with nugget up to " +
                                           std::to_string(nugget.max));
  }

  const auto L = out.chol.matrixL();
  out.whitened_basis = L.solve(basis_matrix);
  const Eigen::VectorXd whitened_values = L.solve(values);
  out.gram.compute(out.whitened_basis.transpose() * out.whitened_basis);
  if (out.gram.info() != Eigen::Success || out.gram.rcond() < 1e-14) {
    throw IdentifiabilityError("kriging", "regression basis is rank deficient on the design");
  }
  out.beta = out.gram.solve(out.whitened_basis.transpose() * whitened_values);

  const Eigen::VectorXd residual = values - basis_matrix * out.beta;
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  out.log_det = 2.0 * out.chol.matrixLLT().diagonal().array().log().sum();
  if (residual.cwiseAbs().maxCoeff() <= 1e-10 * scale) {
    // Data reproduced by the trend alone.
    out.alpha = Eigen::VectorXd::Zero(m);
    out.process_variance = 0.0;
    out.neg_log_likelihood = -std::numeric_limits<double>::infinity();
    return out;
  }
  const Eigen::VectorXd whitened_residual = L.solve(residual);
  out.alpha = out.chol.matrixU().solve(whitened_residual);
  out.process_variance = whitened_residual.squaredNorm() / static_cast<double>(m);
  out.neg_log_likelihood =
      0.5 * static_cast<double>(m) * std::log(out.process_variance) + 0.5 * out.log_det;
  return out;
}

}  // namespace detail

LikelihoodFit fit_given_lengths(const DesignOfExperiments& doe, const RegressionBasis& basis,
                                const Eigen::VectorXd& lengths, const NuggetSchedule& nugget) {
  if (lengths.size() != doe.dimension()) throw InputError("kriging", "lengths dimension mismatch");
  if (!(lengths.array() > 0.0).all() || !lengths.allFinite()) {
    throw ConfigError("kriging", "correlation lengths must be positive and finite");
  }
  const Eigen::MatrixXd scaled = doe.points().array().rowwise() / lengths.transpose().array();
  const auto gls = detail::solve_gls(detail::correlation_matrix(scaled),
                                     basis.design_matrix(doe.points()), doe.values(), nugget);
  return {gls.beta, gls.process_variance, gls.neg_log_likelihood, gls.nugget};
}

// KrigingModel --------------------------------------------------------------


KrigingModel::KrigingModel(std::shared_ptr<const State> state) : state_(std::move(state)) {}

std::shared_ptr<KrigingModel::State> KrigingModel::build(DesignOfExperiments doe,
                                                               RegressionBasis basis,
                                                               const Eigen::VectorXd& lengths,
                                                               const NuggetSchedule& nugget) {
  if (lengths.size() != doe.dimension()) throw InputError("kriging", "lengths dimension mismatch");
  if (!(lengths.array() > 0.0).all() || !lengths.allFinite()) {
    throw ConfigError("kriging", "correlation lengths must be positive and finite");
  }
  auto state = std::make_shared<State>(std::move(doe), std::move(basis));
  state->lengths = lengths;
  state->scaled_points = state->doe.points().array().rowwise() / lengths.transpose().array();
  state->gls = detail::solve_gls(detail::correlation_matrix(state->scaled_points),
                                 state->basis.design_matrix(state->doe.points()),
                                 state->doe.values(), nugget);
  state->options.nugget = nugget;
  return state;
}

KrigingModel KrigingModel::fit_with_lengths(DesignOfExperiments doe, RegressionBasis basis,
                                            const Eigen::VectorXd& lengths,
                                            const NuggetSchedule& nugget) {
  return KrigingModel(build(std::move(doe), std::move(basis), lengths, nugget));
}

int KrigingModel::dimension() const { return state_->doe.dimension(); }

Prediction KrigingModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension()) throw InputError("kriging", "predict: dimension mismatch");
  if (!x.allFinite()) throw InputError("kriging", "predict: non-finite coordinate");
  if (const auto i = state_->doe.find_near(x)) return {state_->doe.values()[*i], 0.0};
  return predict_raw(x);
}

Prediction KrigingModel::predict_raw(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension()) throw InputError("kriging", "predict: dimension mismatch");
  const State& s = *state_;
  const Eigen::VectorXd scaled = x.cwiseQuotient(s.lengths);
  const Eigen::VectorXd r =
      (-(s.scaled_points.rowwise() - scaled.transpose()).rowwise().squaredNorm()).array().exp();
  const Eigen::VectorXd f = s.basis.evaluate(x);

  Prediction out;
  out.mean = f.dot(s.gls.beta) + r.dot(s.gls.alpha);
  if (s.gls.process_variance == 0.0) return out;

  const Eigen::VectorXd v = s.gls.chol.matrixL().solve(r);
  const Eigen::VectorXd u = s.gls.whitened_basis.transpose() * v - f;
  const Eigen::VectorXd w = s.gls.gram.matrixL().solve(u);
  const double variance = s.gls.process_variance * (1.0 - v.squaredNorm() + w.squaredNorm());
  out.std = variance > 0.0 ? std::sqrt(variance) : 0.0;
  return out;
}

double KrigingModel::process_std() const { return std::sqrt(state_->gls.process_variance); }
const DesignOfExperiments& KrigingModel::doe() const { return state_->doe; }
const RegressionBasis& KrigingModel::basis() const { return state_->basis; }
const Eigen::VectorXd& KrigingModel::lengths() const { return state_->lengths; }
const Eigen::VectorXd& KrigingModel::beta() const { return state_->gls.beta; }
double KrigingModel::process_variance() const { return state_->gls.process_variance; }
double KrigingModel::nugget() const { return state_->gls.nugget; }
double KrigingModel::neg_log_likelihood() const { return state_->gls.neg_log_likelihood; }
int KrigingModel::likelihood_evaluations() const { return state_->evaluations; }
const FitOptions& KrigingModel::fit_options() const { return state_->options; }

}  // namespace metais
