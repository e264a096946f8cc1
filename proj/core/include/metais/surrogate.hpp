#pragma once

#include <Eigen/Core>

namespace metais {

/// Gaussian predictive distribution of the surrogate at one point.
struct Prediction {
  double mean = 0.0;
  double std = 0.0;  ///< never negative
};

/// Anything that yields a Gaussian prediction of g. KrigingModel is the
/// production implementation; tests plug in synthetic ones (exact, constant
/// probability, ...) to pin the estimators' limit behaviour.
class Surrogate {
 public:
  virtual ~Surrogate() = default;

  virtual int dimension() const = 0;
  virtual Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;

  /// Prior process standard deviation sigma_G. Predictive std values below
  /// 1e-12 * sigma_G are treated as zero by the classifiers.
  virtual double process_std() const = 0;
};

}  // namespace metais
