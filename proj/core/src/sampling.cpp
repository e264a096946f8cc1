#include "metais/sampling.hpp"

#include <cmath>

namespace metais {

Eigen::VectorXd sample_standard_normal(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd u(n);
  for (int k = 0; k < n; ++k) u[k] = normal(rng);
  return u;
}

Eigen::VectorXd sample_uniform_ball(int n, double radius, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::VectorXd direction = sample_standard_normal(n, rng);
  double norm = direction.norm();
  while (norm == 0.0) {
    direction = sample_standard_normal(n, rng);
    norm = direction.norm();
  }
  const double r = radius * std::pow(uniform(rng), 1.0 / n);
  Eigen::VectorXd point = direction * (r / norm);
  while (point.norm() > radius) point *= 1.0 - 1e-15;
  return point;
}

Eigen::MatrixXd sample_uniform_ball(int rows, int n, double radius, Rng& rng) {
  Eigen::MatrixXd points(rows, n);
  for (int i = 0; i < rows; ++i) points.row(i) = sample_uniform_ball(n, radius, rng).transpose();
  return points;
}

}  // namespace metais
