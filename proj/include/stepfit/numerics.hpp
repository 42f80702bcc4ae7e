#pragma once

#include <cmath>
#include <span>

#include "stepfit/polynomial.hpp"

namespace stepfit {

/// e^z - 1 without cancellation for small |z|.
inline Complex expm1(Complex z) {
    const double x = z.real();
    const double y = z.imag();
    const double s = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

/// Sign with an explicit zero band: -1, 0 or +1.
inline int sign_of(double v, double zero_tol = 0.0) {
    if (v > zero_tol) return 1;
    if (v < -zero_tol) return -1;
    return 0;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit least_squares_line(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log(y) against log(x). Requires positive data.
LineFit loglog_fit(std::span<const double> x, std::span<const double> y);

}  // namespace stepfit
