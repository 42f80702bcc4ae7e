#include "stepfit/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stepfit/errors.hpp"
#include "stepfit/learn.hpp"
#include "stepfit/numerics.hpp"

namespace stepfit {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_grid(int nx, int ny) {
    if (nx < 1 || ny < 1) throw DegenerateError("grid sizes must be positive");
}

std::vector<Complex> char_coeffs(const MultistepScheme& s, Complex xi) {
    std::vector<Complex> c(s.k + 1);
    for (int j = 0; j <= s.k; ++j) c[j] = s.alpha[j] - xi * s.beta[j];
    return c;
}

bool leading_vanishes(const MultistepScheme& s, Complex xi, Complex lead) {
    return std::abs(lead) <= 4.0 * kEps * (std::abs(s.alpha[s.k]) + std::abs(xi) * std::abs(s.beta[s.k]));
}

}  // namespace

RegionMap::RegionMap(Window w, int nx_, int ny_)
    : window(w), nx(nx_), ny(ny_),
      values(static_cast<std::size_t>(nx_) * ny_, 0.0),
      flagged(static_cast<std::size_t>(nx_) * ny_, false) {}

std::string_view to_string(RootClass c) noexcept {
    switch (c) {
        case RootClass::AllInside: return "all_inside";
        case RootClass::OnCircle: return "on_circle";
        case RootClass::Coexist: return "coexist";
        case RootClass::AllOutside: return "all_outside";
        case RootClass::Repeated: return "repeated";
    }
    return "?";
}

double one_step_modulus(const OneStepScheme& s, Complex xi) { return std::abs(s.amplification(xi)); }

double one_step_modulus(SchemeId id, Complex xi) { return one_step_modulus(one_step(id), xi); }

bool one_step_member(const OneStepScheme& s, Complex xi) {
    try {
        return one_step_modulus(s, xi) <= 1.0;
    } catch (const PoleError&) {
        return false;
    }
}

RootSet lmm_characteristic_roots(const MultistepScheme& s, Complex xi) {
    auto c = char_coeffs(s, xi);
    if (leading_vanishes(s, xi, c.back()))
        throw SingularStepError(s.name + ": alpha_k - xi beta_k vanishes");
    return roots(Polynomial(std::move(c)));
}

RootClass classify_roots(const RootSet& rs, double band) {
    if (rs.has_repeated()) return RootClass::Repeated;
    std::size_t inside = 0, on = 0, outside = 0;
    for (const auto& z : rs.roots) {
        const double r = std::abs(z);
        if (r < 1.0 - band)
            ++inside;
        else if (r > 1.0 + band)
            ++outside;
        else
            ++on;
    }
    const std::size_t n = rs.roots.size();
    if (inside == n) return RootClass::AllInside;
    if (outside == n) return RootClass::AllOutside;
    if (outside > 0) return RootClass::Coexist;
    return RootClass::OnCircle;
}

RootClass lmm_membership(const MultistepScheme& s, Complex xi) {
    auto c = char_coeffs(s, xi);
    if (!leading_vanishes(s, xi, c.back())) return classify_roots(roots(Polynomial(std::move(c))));

    // One root went to infinity.
    c.pop_back();
    const Polynomial rest(std::move(c));
    if (rest.degree() < 1) return RootClass::AllOutside;
    const RootSet rs = roots(rest);
    for (const auto& z : rs.roots)
        if (std::abs(z) <= 1.0 + kUnitCircleBand) return RootClass::Coexist;
    return RootClass::AllOutside;
}

RootClass lmm_membership(SchemeId id, Complex xi) { return lmm_membership(multistep(id), xi); }

bool in_absolute_stability_region(const MultistepScheme& s, Complex xi) {
    return lmm_membership(s, xi) == RootClass::AllInside;
}

BoundaryLocus boundary_locus(const MultistepScheme& s, int n_theta) {
    if (n_theta < 1) throw DegenerateError("locus: n_theta must be positive");
    double beta_sum = 0.0;
    for (double b : s.beta) beta_sum += std::abs(b);
    BoundaryLocus out;
    for (int j = 0; j < n_theta; ++j) {
        const double theta = 2.0 * std::numbers::pi * j / n_theta;
        const auto [rho, kappa] = rho_kappa_at_exp(s, Complex{0.0, theta});
        if (std::abs(kappa) <= 4.0 * kEps * beta_sum) {
            out.omitted.push_back(j);
            continue;
        }
        out.theta.push_back(theta);
        out.points.push_back(rho / kappa);
    }
    return out;
}

BoundaryLocus boundary_locus(SchemeId id, int n_theta) { return boundary_locus(multistep(id), n_theta); }

RegionMap one_step_region(const OneStepScheme& s, Window w, int nx, int ny) {
    check_grid(nx, ny);
    RegionMap map(w, nx, ny);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const Complex xi{map.x_at(ix), map.y_at(iy)};
            try {
                map.at(ix, iy) = one_step_modulus(s, xi);
            } catch (const PoleError&) {
                map.at(ix, iy) = std::numeric_limits<double>::infinity();
                map.flagged[static_cast<std::size_t>(iy) * nx + ix] = true;
            }
        }
    return map;
}

RegionMap classification_map(const MultistepScheme& s, Window w, int nx, int ny) {
    check_grid(nx, ny);
    RegionMap map(w, nx, ny);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const Complex xi{map.x_at(ix), map.y_at(iy)};
            try {
                map.at(ix, iy) = static_cast<int>(lmm_membership(s, xi));
            } catch (const IterationError&) {
                map.flagged[static_cast<std::size_t>(iy) * nx + ix] = true;
            }
        }
    return map;
}

RegionMap re_sign_map(const MultistepScheme& s, Window w, int nx, int ny) {
    check_grid(nx, ny);
    RegionMap map(w, nx, ny);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const Complex x{map.x_at(ix), map.y_at(iy)};
            try {
                map.at(ix, iy) = sign_of(lmm_learned_xi(s, x).real());
            } catch (const PoleError&) {
                map.flagged[static_cast<std::size_t>(iy) * nx + ix] = true;
            }
        }
    return map;
}

Complex two_step_discriminant(const MultistepScheme& s, Complex xi) {
    if (s.k != 2) throw UnsupportedError(s.name + ": discriminant needs a two-step scheme");
    const auto c = char_coeffs(s, xi);
    return c[1] * c[1] - 4.0 * c[2] * c[0];
}

std::vector<Complex> repeated_root_locus(const MultistepScheme& s) {
    if (s.k != 2) throw UnsupportedError(s.name + ": repeated-root locus needs a two-step scheme");
    const double a0 = s.alpha[0], a1 = s.alpha[1], a2 = s.alpha[2];
    const double b0 = s.beta[0], b1 = s.beta[1], b2 = s.beta[2];
    // (a1 - xi b1)^2 - 4 (a2 - xi b2)(a0 - xi b0) = A xi^2 + B xi + C
    const double A = b1 * b1 - 4.0 * b2 * b0;
    const double B = -2.0 * a1 * b1 + 4.0 * (a2 * b0 + a0 * b2);
    const double C = a1 * a1 - 4.0 * a2 * a0;

    std::vector<Complex> xs;
    if (A != 0.0) {
        const auto [r1, r2] = quadratic_roots(A, B, C);
        xs = {r1, r2};
    } else if (B != 0.0) {
        xs = {Complex{-C / B}};
    } else {
        throw DegenerateError(s.name + ": discriminant is constant in xi");
    }
    // A double root requires an honest quadratic at xi.
    std::erase_if(xs, [&](Complex xi) { return leading_vanishes(s, xi, a2 - xi * b2); });
    std::sort(xs.begin(), xs.end(), [](Complex p, Complex q) {
        return p.real() != q.real() ? p.real() < q.real() : p.imag() < q.imag();
    });
    return xs;
}

std::vector<Complex> repeated_root_locus(SchemeId id) { return repeated_root_locus(multistep(id)); }

}  // namespace stepfit
