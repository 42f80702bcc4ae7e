#pragma once

// Reference computations written independently of the library code paths.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;

// Truncated exponential series sum_{j<=n} xi^j / j!.
inline C taylor(C xi, int n) {
    C term = 1.0, sum = 1.0;
    for (int j = 1; j <= n; ++j) {
        term *= xi / static_cast<double>(j);
        sum += term;
    }
    return sum;
}

inline C fe(C xi) { return 1.0 + xi; }
inline C be(C xi) { return 1.0 / (1.0 - xi); }
inline C trap(C xi) { return (1.0 + 0.5 * xi) / (1.0 - 0.5 * xi); }

// Bisection for f(lo) and f(hi) of opposite signs.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Coefficients in ascending powers of z, alpha_k = 1.
struct Lmm {
    std::vector<double> alpha, beta;
};

inline Lmm ab2() { return {{0, -1, 1}, {-0.5, 1.5, 0}}; }
inline Lmm ab3() { return {{0, 0, -1, 1}, {5.0 / 12, -16.0 / 12, 23.0 / 12, 0}}; }
inline Lmm am3() { return {{0, -1, 1}, {-1.0 / 12, 8.0 / 12, 5.0 / 12}}; }
inline Lmm bdf2() { return {{1.0 / 3, -4.0 / 3, 1}, {0, 0, 2.0 / 3}}; }
inline Lmm leapfrog() { return {{-1, 0, 1}, {0, 2, 0}}; }

inline C poly(const std::vector<double>& c, C z) {
    C s = 0.0, p = 1.0;
    for (double a : c) {
        s += a * p;
        p *= z;
    }
    return s;
}

// Roots of rho(z) - xi kappa(z) for a two-step method via the quadratic formula.
inline std::pair<C, C> two_step_roots(const Lmm& m, C xi) {
    const C a = m.alpha[2] - xi * m.beta[2];
    const C b = m.alpha[1] - xi * m.beta[1];
    const C c = m.alpha[0] - xi * m.beta[0];
    const C d = std::sqrt(b * b - 4.0 * a * c);
    return {(-b + d) / (2.0 * a), (-b - d) / (2.0 * a)};
}

// e^{tA} for A = [[0, w], [-w, 0]].
inline Eigen::Matrix2d rotation_exp(double w, double t) {
    Eigen::Matrix2d R;
    R << std::cos(w * t), std::sin(w * t), -std::sin(w * t), std::cos(w * t);
    return R;
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
