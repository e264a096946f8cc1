#pragma once

namespace metais {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

/// Phi^{-1}(0.975), the default margin multiplier.
inline constexpr double kMargin95 = 1.959963984540054;

double normal_pdf(double x);
double normal_cdf(double x);

/// log Phi(x), accurate far into the lower tail where Phi(x) underflows.
double normal_log_cdf(double x);

/// Phi^{-1}(p) for p in (0, 1); returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

}  // namespace metais
