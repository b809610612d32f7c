#pragma once

namespace spectrum::dist {

/// Standard normal CDF.
double normal_cdf(double z);

/// Two-sided normal p-value, 2 * (1 - Phi(|z|)).
double two_sided_p(double z);

/// Upper tail P(X > x) for X ~ chi-squared with `df` degrees of freedom,
/// i.e. the regularized upper incomplete gamma Q(df/2, x/2).
double chi2_sf(double x, double df);

}  // namespace spectrum::dist
