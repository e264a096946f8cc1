#pragma once

#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "metais/kriging.hpp"

namespace metais::detail {

/// R(i, j) = exp(-||s_i - s_j||^2) for rows already divided by the lengths.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& scaled_points);

/// Everything the predictor and the likelihood need for one set of lengths.
struct GlsSolution {
  Eigen::LLT<Eigen::MatrixXd> chol;  ///< R + nugget I
  double nugget = 0.0;
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;             ///< R^-1 (y - F beta)
  Eigen::MatrixXd whitened_basis;    ///< L^-1 F
  Eigen::LLT<Eigen::MatrixXd> gram;  ///< F' R^-1 F
  double process_variance = 0.0;
  double log_det = 0.0;
  double neg_log_likelihood = 0.0;
};

/// Throws IdentifiabilityError / ConditioningError.
GlsSolution solve_gls(const Eigen::MatrixXd& correlation, const Eigen::MatrixXd& basis_matrix,
                      const Eigen::VectorXd& values, const NuggetSchedule& nugget);

}  // namespace metais::detail

namespace metais {

struct KrigingModel::State {
  State(DesignOfExperiments d, RegressionBasis b) : doe(std::move(d)), basis(std::move(b)) {}

  DesignOfExperiments doe;
  RegressionBasis basis;
  Eigen::VectorXd lengths;
  Eigen::MatrixXd scaled_points;
  detail::GlsSolution gls;
  int evaluations = 1;
  FitOptions options;
};

}  // namespace metais
