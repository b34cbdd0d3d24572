#include "hsic/incomplete_gamma.hpp"

#include "hsic/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hsic {

namespace {

constexpr double kRelTol = 1e-12;
constexpr int kBaseIterations = 500;
constexpr double kTiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();

double log_gamma(double a) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(a, &sign);  // reentrant; std::lgamma writes signgam
#else
    return std::lgamma(a);
#endif
}

// Both expansions need O(sqrt(a)) terms near x = a.
int iteration_cap(double a) {
    return std::max(kBaseIterations, static_cast<int>(50.0 * std::sqrt(a)));
}

// log of x^a e^-x / Gamma(a)
double log_prefactor(double a, double x) { return a * std::log(x) - x - log_gamma(a); }

double lower_series(double a, double x) {
    const int cap = iteration_cap(a);
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int it = 0; it < cap; ++it) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kRelTol) {
            return sum * std::exp(log_prefactor(a, x));
        }
    }
    throw NumericError("incomplete gamma series did not converge");
}

double upper_fraction(double a, double x) {
    const int cap = iteration_cap(a);
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= cap; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kRelTol) {
            return std::exp(log_prefactor(a, x)) * h;
        }
    }
    throw NumericError("incomplete gamma continued fraction did not converge");
}

}  // namespace

double gamma_q(double a, double x) {
    if (!std::isfinite(a) || a <= 0.0) {
        throw InputError("incomplete gamma shape must be positive and finite");
    }
    if (std::isnan(x)) {
        throw InputError("incomplete gamma argument is NaN");
    }
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) {
        return std::clamp(1.0 - lower_series(a, x), 0.0, 1.0);
    }
    return std::clamp(upper_fraction(a, x), 0.0, 1.0);
}

double chi_sq_sf(double x, double d) {
    if (!std::isfinite(d) || d <= 0.0) {
        throw InputError("chi-square degrees of freedom must be positive and finite");
    }
    return gamma_q(0.5 * d, 0.5 * x);
}

double gamma_sf(double x, double shape, double scale) {
    if (!std::isfinite(scale) || scale <= 0.0) {
        throw InputError("gamma scale must be positive and finite");
    }
    return gamma_q(shape, x / scale);
}

}  // namespace hsic
