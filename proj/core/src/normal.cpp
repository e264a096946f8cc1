#include "metais/normal.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

namespace metais {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x - 0.5 * kLogTwoPi);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double normal_log_cdf(double x) {
  if (x > -30.0) {
    return std::log(normal_cdf(x));
  }
  // Mills-ratio asymptotic series; relative error below 1e-12 for x < -30.
  const double z2 = 1.0 / (x * x);
  const double series = 1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2 * (1.0 - 7.0 * z2)));
  return -0.5 * x * x - 0.5 * kLogTwoPi - std::log(-x) + std::log(series);
}

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return -M_SQRT2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace metais
