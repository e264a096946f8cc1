#include "metais/classify.hpp"

#include <cmath>
#include <limits>

#include "metais/errors.hpp"

namespace metais {

void MarginSpec::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("classify", "margin k must be positive");
}

double std_floor(const Surrogate& model) { return 1e-12 * model.process_std(); }

double prob_failure(const Prediction& p, double floor) {
  if (p.std <= floor) return p.mean <= 0.0 ? 1.0 : 0.0;
  return normal_cdf(-p.mean / p.std);
}

double prob_failure(const Surrogate& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return prob_failure(model.predict(x), std_floor(model));
}

double prob_safe(const Prediction& p, double floor) {
  if (p.std <= floor) return p.mean <= 0.0 ? 0.0 : 1.0;
  return normal_cdf(p.mean / p.std);
}

double log_prob_failure(const Prediction& p, double floor) {
  if (p.std <= floor) return p.mean <= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return normal_log_cdf(-p.mean / p.std);
}

double prob_in_margin(const Prediction& p, double floor, const MarginSpec& spec) {
  if (p.std <= floor) return 0.0;
  // The difference is symmetric in mu; using |mu| keeps both terms in the
  // lower tail where they do not cancel.
  const double t = std::abs(p.mean) / p.std;
  const double value = normal_cdf(spec.k - t) - normal_cdf(-spec.k - t);
  return value > 0.0 ? value : 0.0;
}

double prob_in_margin(const Surrogate& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const MarginSpec& spec) {
  return prob_in_margin(model.predict(x), std_floor(model), spec);
}

Classification mean_sign_classify(const Prediction& p) {
  return p.mean <= 0.0 ? Classification::fail : Classification::safe;
}

Classification mean_sign_classify(const Surrogate& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& x) {
  return mean_sign_classify(model.predict(x));
}

}  // namespace metais
