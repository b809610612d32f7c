#include "spectrum/distributions.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

#include "spectrum/errors.hpp"

namespace spectrum::dist {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double two_sided_p(double z) {
  if (std::isnan(z)) return z;
  // erfc keeps full relative precision in the tail.
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

double chi2_sf(double x, double df) {
  if (!(df > 0.0)) throw DomainError("chi2_sf: degrees of freedom must be positive");
  if (std::isnan(x)) return x;
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace spectrum::dist
