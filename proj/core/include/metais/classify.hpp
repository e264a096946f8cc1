#pragma once

#include <Eigen/Core>

#include "metais/normal.hpp"
#include "metais/surrogate.hpp"

namespace metais {

/// Confidence multiplier k of the margin {-k sigma <= G <= k sigma}.
struct MarginSpec {
  double k = kMargin95;

  /// Throws ConfigError unless k > 0.
  void validate() const;
};

enum class Classification { fail, safe };

/// Predictive std at or below this is treated as zero.
double std_floor(const Surrogate& model);

/// P[G(x) <= 0] = Phi(-mu / sigma); the indicator mu <= 0 when sigma is
/// below the floor.
double prob_failure(const Prediction& p, double floor);
double prob_failure(const Surrogate& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// P[G(x) > 0], computed from the mirrored argument.
double prob_safe(const Prediction& p, double floor);

/// log P[G(x) <= 0]; -inf where the probability is zero.
double log_prob_failure(const Prediction& p, double floor);

/// Phi(k - mu/sigma) - Phi(-k - mu/sigma); zero below the std floor.
double prob_in_margin(const Prediction& p, double floor, const MarginSpec& spec = {});
double prob_in_margin(const Surrogate& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const MarginSpec& spec = {});

/// Mean-sign rule: fail iff mu <= 0.
Classification mean_sign_classify(const Prediction& p);
Classification mean_sign_classify(const Surrogate& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace metais
