#include "stepfit/polyroot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "stepfit/errors.hpp"

namespace stepfit {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxIter = 600;

double rounding_level(const Polynomial& p, Complex z) { return 8.0 * kEps * p.magnitude_bound(z); }

// One Aberth-Ehrlich correction for root j; returns the applied step.
Complex aberth_step(const Polynomial& p, std::vector<Complex>& z, std::size_t j) {
    Complex value, deriv;
    p.evaluate_with_derivative(z[j], value, deriv);
    if (value == Complex{0.0}) return Complex{0.0};
    Complex repulsion{0.0};
    for (std::size_t k = 0; k < z.size(); ++k)
        if (k != j) repulsion += 1.0 / (z[j] - z[k]);
    const Complex denom = deriv - value * repulsion;
    Complex step;
    if (denom == Complex{0.0}) {
        // Stationary point of the Aberth correction: nudge off it.
        step = Complex{1e-3, 1e-3} * (1.0 + std::abs(z[j]));
    } else {
        step = value / denom;
    }
    z[j] -= step;
    return step;
}

// Merge clusters of iterates that sit on a repeated root. A cluster of size mu
// is replaced by the zero of P^{(mu-1)} near its centroid, provided that point
// is itself a root of P to rounding level.
void merge_clusters(const Polynomial& p, std::vector<Complex>& z) {
    const std::size_t n = z.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double scale = std::max({1.0, std::abs(z[i]), std::abs(z[j])});
            if (std::abs(z[i] - z[j]) <= 1e-5 * scale) parent[find(i)] = find(j);
        }

    std::vector<std::vector<std::size_t>> clusters(n);
    for (std::size_t i = 0; i < n; ++i) clusters[find(i)].push_back(i);

    for (const auto& members : clusters) {
        if (members.size() < 2) continue;
        Complex m{0.0};
        for (auto i : members) m += z[i];
        m /= static_cast<double>(members.size());

        Polynomial d = p;
        for (std::size_t t = 1; t < members.size(); ++t) d = d.derivative();
        for (int it = 0; it < 30; ++it) {
            Complex v, dv;
            d.evaluate_with_derivative(m, v, dv);
            if (v == Complex{0.0} || dv == Complex{0.0}) break;
            const Complex step = v / dv;
            m -= step;
            if (std::abs(step) <= 2.0 * kEps * std::max(1.0, std::abs(m))) break;
        }
        if (std::abs(p(m)) <= 4.0 * rounding_level(p, m))
            for (auto i : members) z[i] = m;
    }
}

}  // namespace

bool RootSet::has_repeated() const noexcept {
    return std::any_of(multiplicity_flags.begin(), multiplicity_flags.end(), [](bool b) { return b; });
}

double default_root_tol(const Polynomial& p) { return 1e-12 * p.max_abs_coeff(); }

RootSet roots(const Polynomial& p) { return roots(p, default_root_tol(p)); }

RootSet roots(const Polynomial& p, double tol) {
    const int n = p.degree();
    if (n < 1) throw DegenerateError("roots: polynomial has degree < 1");

    std::vector<Complex> found;
    found.reserve(n);

    // Exact zero roots.
    std::size_t low = 0;
    while (p[low] == Complex{0.0}) {
        found.emplace_back(0.0);
        ++low;
    }
    std::vector<Complex> rest(p.coeffs().begin() + static_cast<std::ptrdiff_t>(low), p.coeffs().end());
    const Complex lead = rest.back();
    for (auto& c : rest) c /= lead;
    const Polynomial q(std::move(rest));
    const int m = q.degree();

    if (m == 1) {
        found.push_back(-q[0]);
    } else if (m > 1) {
        // Initial guesses on a circle of radius |a_0|^{1/m} (geometric mean of
        // the root moduli), rotated off the real axis.
        const double radius = std::pow(std::abs(q[0]), 1.0 / m);
        std::vector<Complex> z(m);
        for (int j = 0; j < m; ++j)
            z[j] = std::polar(radius, 2.0 * std::numbers::pi * j / m + 0.4);

        bool converged = false;
        for (int iter = 0; iter < kMaxIter && !converged; ++iter) {
            converged = true;
            for (std::size_t j = 0; j < z.size(); ++j) {
                const Complex step = aberth_step(q, z, j);
                const bool small_step = std::abs(step) <= 2.0 * kEps * std::abs(z[j]);
                const bool at_rounding = std::abs(q(z[j])) <= rounding_level(q, z[j]);
                if (!(small_step || at_rounding)) converged = false;
            }
        }
        if (!converged) {
            std::size_t worst = 0;
            for (std::size_t j = 1; j < z.size(); ++j)
                if (std::abs(q(z[j])) > std::abs(q(z[worst]))) worst = j;
            throw IterationError("roots: Aberth iteration did not converge", z[worst]);
        }
        // One more sweep to settle the last digits.
        for (std::size_t j = 0; j < z.size(); ++j) {
            const Complex before = z[j];
            aberth_step(q, z, j);
            if (!(std::abs(q(z[j])) <= std::abs(q(before)))) z[j] = before;
        }
        merge_clusters(q, z);
        found.insert(found.end(), z.begin(), z.end());
    }

    RootSet out;
    out.roots = std::move(found);
    out.residuals.resize(out.roots.size());
    out.multiplicity_flags.assign(out.roots.size(), false);
    for (std::size_t j = 0; j < out.roots.size(); ++j) {
        const double res = std::abs(p(out.roots[j]));
        out.residuals[j] = res;
        if (!(res <= std::max(tol, rounding_level(p, out.roots[j]))))
            throw IterationError("roots: residual above tolerance", out.roots[j]);
    }
    for (std::size_t i = 0; i < out.roots.size(); ++i)
        for (std::size_t j = i + 1; j < out.roots.size(); ++j)
            if (std::abs(out.roots[i] - out.roots[j]) <= 10.0 * tol) {
                out.multiplicity_flags[i] = true;
                out.multiplicity_flags[j] = true;
            }
    return out;
}

std::pair<Complex, Complex> quadratic_roots(Complex a, Complex b, Complex c) {
    if (a == Complex{0.0}) throw DegenerateError("quadratic_roots: leading coefficient is zero");
    const Complex sq = std::sqrt(b * b - 4.0 * a * c);
    const Complex q = (std::real(std::conj(b) * sq) >= 0.0) ? -0.5 * (b + sq) : -0.5 * (b - sq);
    if (q == Complex{0.0}) return {Complex{0.0}, Complex{0.0}};
    return {q / a, c / q};
}

}  // namespace stepfit
