#pragma once

namespace vglab {

// Gamma function on the positive half line (wraps std::tgamma with a domain
// check; the library only ever needs arguments in (0, 5]).
double gamma_fn(double x);

// Standard normal CDF, Phi(x) = erfc(-x/sqrt(2))/2. Accurate to ~1 ulp.
double normal_cdf(double x);

// Inverse of normal_cdf. Acklam's rational initial guess refined by one
// Halley step against erfc; ~1e-15 absolute over (1e-300, 1-1e-16).
double normal_quantile(double p);

}  // namespace vglab
