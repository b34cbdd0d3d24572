#pragma once

namespace hsic {

/// Regularized upper incomplete gamma function Q(a, x) = Gamma(a, x) / Gamma(a).
///
/// Uses the power series for P = 1 - Q when x < a + 1 and the Lentz
/// continued fraction for Q otherwise, both to relative tolerance 1e-12.
/// Returns 1 for x <= 0. Throws InputError for a <= 0 or non-finite
/// arguments and NumericError if neither expansion converges.
double gamma_q(double a, double x);

/// P(chi^2_d >= x) = Q(d/2, x/2); d may be fractional.
double chi_sq_sf(double x, double d);

/// P(Gamma(shape, scale) >= x).
double gamma_sf(double x, double shape, double scale);

}  // namespace hsic
