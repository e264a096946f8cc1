#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "kriging_internal.hpp"
#include "metais/errors.hpp"

namespace metais {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Profiled likelihood over log-lengths with the per-coordinate squared
/// differences cached once per design.
class LikelihoodSurface {
 public:
  LikelihoodSurface(const DesignOfExperiments& doe, const RegressionBasis& basis,
                    const NuggetSchedule& nugget)
      : doe_(doe), basis_matrix_(basis.design_matrix(doe.points())), nugget_(nugget) {
    const Eigen::Index m = doe.size();
    squares_.reserve(doe.dimension());
    for (int k = 0; k < doe.dimension(); ++k) {
      const Eigen::VectorXd col = doe.points().col(k);
      Eigen::MatrixXd d2(m, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        d2.col(j) = (col.array() - col[j]).square();
      }
      squares_.push_back(std::move(d2));
    }
  }

  /// Returns +inf when the correlation matrix cannot be factorized.
  double evaluate(const Eigen::VectorXd& log_lengths, Eigen::VectorXd* gradient) {
    ++evaluations_;
    const Eigen::Index m = doe_.size();
    Eigen::MatrixXd exponent = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd inv_sq(log_lengths.size());
    for (Eigen::Index k = 0; k < log_lengths.size(); ++k) {
      inv_sq[k] = std::exp(-2.0 * log_lengths[k]);
      exponent.noalias() += inv_sq[k] * squares_[k];
    }
    const Eigen::MatrixXd R = (-exponent.array()).exp().matrix();

    detail::GlsSolution gls;
    try {
      gls = detail::solve_gls(R, basis_matrix_, doe_.values(), nugget_);
    } catch (const ConditioningError&) {
      return kInf;
    }
    if (gradient != nullptr) {
      gradient->setZero(log_lengths.size());
      if (std::isfinite(gls.neg_log_likelihood)) {
        // d/dtheta_k = 1/2 tr(W dR_k), W = R^-1 - alpha alpha' / sigma^2,
        // dR_k = 2 R o D2_k / l_k^2 with theta_k = log l_k.
        Eigen::MatrixXd W = gls.chol.solve(Eigen::MatrixXd::Identity(m, m));
        W.noalias() -= (gls.alpha / gls.process_variance) * gls.alpha.transpose();
        const Eigen::MatrixXd WR = W.cwiseProduct(R);
        for (Eigen::Index k = 0; k < log_lengths.size(); ++k) {
          (*gradient)[k] = WR.cwiseProduct(squares_[k]).sum() * inv_sq[k];
        }
      }
    }
    return gls.neg_log_likelihood;
  }

  int evaluations() const noexcept { return evaluations_; }

 private:
  const DesignOfExperiments& doe_;
  Eigen::MatrixXd basis_matrix_;
  NuggetSchedule nugget_;
  std::vector<Eigen::MatrixXd> squares_;
  int evaluations_ = 0;
};

struct LocalResult {
  Eigen::VectorXd x;
  double value = kInf;
};

/// Projected BFGS with Armijo backtracking on a box.
LocalResult minimize_in_box(LikelihoodSurface& surface, Eigen::VectorXd x,
                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            int max_iterations) {
  const Eigen::Index n = x.size();
  auto clamp = [&](const Eigen::VectorXd& v) { return v.cwiseMax(lower).cwiseMin(upper).eval(); };
  x = clamp(x);
  Eigen::VectorXd g(n);
  double f = surface.evaluate(x, &g);
  if (!std::isfinite(f)) return {x, f};

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::VectorXd free = Eigen::VectorXd::Ones(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      if ((x[k] <= lower[k] && g[k] > 0.0) || (x[k] >= upper[k] && g[k] < 0.0)) free[k] = 0.0;
    }
    const Eigen::VectorXd pg = g.cwiseProduct(free);
    if (pg.lpNorm<Eigen::Infinity>() < 1e-6) break;

    bool accepted = false;
    Eigen::VectorXd x_new, g_new(n);
    double f_new = kInf;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Eigen::VectorXd d = attempt == 0 ? Eigen::VectorXd(-(H * pg).cwiseProduct(free)) : -pg;
      if (d.dot(pg) >= 0.0) d = -pg;
      double t = 1.0;
      const double longest = d.lpNorm<Eigen::Infinity>();
      if (longest > 2.0) t = 2.0 / longest;
      for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
        x_new = clamp(x + t * d);
        const Eigen::VectorXd step = x_new - x;
        if (step.lpNorm<Eigen::Infinity>() < 1e-12) break;
        f_new = surface.evaluate(x_new, &g_new);
        if (std::isfinite(f_new) && f_new <= f + 1e-4 * g.dot(step)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) H.setIdentity();
    }
    if (!accepted) break;

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    const double decrease = f - f_new;
    x = x_new;
    g = g_new;
    f = f_new;
    if (decrease <= 1e-10 * (1.0 + std::abs(f)) && s.lpNorm<Eigen::Infinity>() < 1e-6) break;
  }
  return {x, f};
}

}  // namespace

LengthBounds LengthBounds::from_design(const DesignOfExperiments& doe) {
  const Eigen::VectorXd range =
      doe.points().colwise().maxCoeff().transpose() - doe.points().colwise().minCoeff().transpose();
  // A coordinate that never varies gets a unit range.
  const Eigen::VectorXd L = (range.array() > 0.0).select(range, Eigen::VectorXd::Ones(range.size()));
  return {1e-2 * L, 10.0 * L};
}

LikelihoodGradient profiled_likelihood_gradient(const DesignOfExperiments& doe,
                                                const RegressionBasis& basis,
                                                const Eigen::VectorXd& lengths,
                                                const NuggetSchedule& nugget) {
  if (lengths.size() != doe.dimension()) throw InputError("kriging", "lengths dimension mismatch");
  LikelihoodSurface surface(doe, basis, nugget);
  LikelihoodGradient out;
  out.value = surface.evaluate(lengths.array().log().matrix(), &out.gradient);
  return out;
}

KrigingModel KrigingModel::fit(DesignOfExperiments doe, RegressionBasis basis,
                               const FitOptions& options) {
  const int n = doe.dimension();
  if (basis.size() > doe.size() - 1) {
    throw IdentifiabilityError("kriging", "basis size " + std::to_string(basis.size()) +
                                              " exceeds design size minus one");
  }
  const LengthBounds bounds = options.bounds ? *options.bounds : LengthBounds::from_design(doe);
  if (bounds.lower.size() != n || bounds.upper.size() != n) {
    throw ConfigError("kriging", "length bounds dimension mismatch");
  }
  if (!(bounds.lower.array() > 0.0).all() || !(bounds.lower.array() <= bounds.upper.array()).all() ||
      !bounds.upper.allFinite()) {
    throw ConfigError("kriging", "length bounds must satisfy 0 < lower <= upper < inf");
  }
  const Eigen::VectorXd lo = bounds.lower.array().log();
  const Eigen::VectorXd hi = bounds.upper.array().log();

  std::vector<Eigen::VectorXd> starts;
  for (double t : {0.5, 0.25, 0.75}) starts.push_back(lo + t * (hi - lo));
  if (options.warm_start && options.warm_start->size() == n &&
      (options.warm_start->array() > 0.0).all()) {
    starts.push_back(options.warm_start->array().log().matrix().cwiseMax(lo).cwiseMin(hi));
  }

  LikelihoodSurface surface(doe, basis, options.nugget);
  LocalResult best;
  for (const auto& start : starts) {
    const double at_start = surface.evaluate(start, nullptr);
    if (at_start == -kInf) {
      // Residual-free data: every length is optimal.
      best = {start, at_start};
      break;
    }
    LocalResult local = minimize_in_box(surface, start, lo, hi, options.max_iterations);
    if (at_start < local.value) local = {start, at_start};
    if (local.value < best.value) best = std::move(local);
    if ((hi - lo).lpNorm<Eigen::Infinity>() == 0.0) break;
  }
  if (!(best.value < kInf)) {
    throw ConditioningError("kriging", "fit failed: no length vector gave a factorizable matrix");
  }

  auto state = build(std::move(doe), std::move(basis), best.x.array().exp().matrix(), options.nugget);
  state->evaluations = surface.evaluations();
  state->options = options;
  state->options.warm_start.reset();
  return KrigingModel(std::move(state));
}

Enrichment add_points(const KrigingModel& model, const Eigen::MatrixXd& points,
                      const Eigen::VectorXd& values) {
  if (points.rows() != values.size()) {
    throw InputError("kriging", "add_points: point and value counts differ");
  }
  Enrichment out{model, {}, {}, false};
  if (points.rows() > 0 && points.cols() != model.dimension()) {
    throw InputError("kriging", "add_points: dimension mismatch");
  }
  out.accepted = model.doe().separated_candidates(points);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (std::find(out.accepted.begin(), out.accepted.end(), i) == out.accepted.end()) {
      out.dropped.push_back(i);
    }
  }
  if (out.accepted.empty()) {
    out.noop = true;
    return out;
  }

  const auto& doe = model.doe();
  const Eigen::Index m = doe.size();
  const Eigen::Index k = static_cast<Eigen::Index>(out.accepted.size());
  Eigen::MatrixXd union_points(m + k, doe.dimension());
  Eigen::VectorXd union_values(m + k);
  union_points.topRows(m) = doe.points();
  union_values.head(m) = doe.values();
  for (Eigen::Index j = 0; j < k; ++j) {
    union_points.row(m + j) = points.row(out.accepted[j]);
    union_values[m + j] = values[out.accepted[j]];
  }

  FitOptions options = model.fit_options();
  options.warm_start = model.lengths();
  out.model = KrigingModel::fit(
      DesignOfExperiments(std::move(union_points), std::move(union_values), doe.min_separation()),
      model.basis(), options);
  return out;
}

}  // namespace metais
