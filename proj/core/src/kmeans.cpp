#include <limits>
#include <random>
#include <vector>

#include "metais/errors.hpp"
#include "metais/refine.hpp"
#include "metais/seed.hpp"

namespace metais {
namespace {

Eigen::VectorXd nearest_sq_distance(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                                    Eigen::Index count) {
  Eigen::VectorXd best = Eigen::VectorXd::Constant(points.rows(), std::numeric_limits<double>::infinity());
  for (Eigen::Index c = 0; c < count; ++c) {
    best = best.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return best;
}

}  // namespace

Eigen::MatrixXd kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed) {
  const Eigen::Index N = points.rows();
  if (k < 1) throw InputError("refine", "kmeans: K must be positive");
  if (N < k) {
    throw InputError("refine", "kmeans: " + std::to_string(N) + " points for K = " + std::to_string(k));
  }
  Rng rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, N - 1);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // k-means++ seeding.
  Eigen::MatrixXd centers(k, points.cols());
  centers.row(0) = points.row(pick(rng));
  for (int c = 1; c < k; ++c) {
    const Eigen::VectorXd d2 = nearest_sq_distance(points, centers, c);
    const double total = d2.sum();
    Eigen::Index chosen = pick(rng);
    if (total > 0.0) {
      double target = uniform(rng) * total;
      for (Eigen::Index i = 0; i < N; ++i) {
        if (d2[i] <= 0.0) continue;
        chosen = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
    }
    centers.row(c) = points.row(chosen);
  }

  std::vector<int> assignment(N, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < N; ++i) {
      Eigen::Index best = 0;
      (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (assignment[i] != static_cast<int>(best)) {
        assignment[i] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < N; ++i) {
      sums.row(assignment[i]) += points.row(i);
      ++counts[assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
      }
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      // Empty cluster: move it to the point farthest from the other centers.
      Eigen::MatrixXd others(k - 1, points.cols());
      for (int o = 0, row = 0; o < k; ++o) {
        if (o != c) others.row(row++) = centers.row(o);
      }
      Eigen::Index far = 0;
      nearest_sq_distance(points, others, k - 1).maxCoeff(&far);
      centers.row(c) = points.row(far);
    }
  }
  return centers;
}

}  // namespace metais
