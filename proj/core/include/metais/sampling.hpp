#pragma once

#include <Eigen/Core>

#include "metais/seed.hpp"

namespace metais {

/// n independent N(0,1) coordinates, drawn in index order.
Eigen::VectorXd sample_standard_normal(int n, Rng& rng);

/// Uniform point in the n-ball of given radius: Gaussian direction scaled
/// by radius * U^(1/n).
Eigen::VectorXd sample_uniform_ball(int n, double radius, Rng& rng);

/// rows x n matrix of uniform-ball points.
Eigen::MatrixXd sample_uniform_ball(int rows, int n, double radius, Rng& rng);

}  // namespace metais
