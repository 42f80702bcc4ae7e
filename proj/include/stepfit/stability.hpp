#pragma once

#include <numbers>
#include <string_view>
#include <vector>

#include "stepfit/polyroot.hpp"
#include "stepfit/schemes.hpp"

namespace stepfit {

/// Axis-aligned rectangle of the complex plane (or of the (a, theta) plane).
struct Window {
    double x0 = 0.0;
    double x1 = 1.0;
    double y0 = 0.0;
    double y1 = 1.0;
};

inline constexpr Window kDefaultOneStepWindow{-4.0, 1.0, -3.0, 3.0};
inline constexpr Window kDefaultLmmWindow{-3.0, 0.0, -std::numbers::pi, std::numbers::pi};
inline constexpr int kDefaultGrid = 401;

/// Cell-centred grid with one value per cell, stored row-major (iy * nx + ix).
struct RegionMap {
    Window window;
    int nx = 0;
    int ny = 0;
    std::vector<double> values;
    std::vector<bool> flagged;  // pole or otherwise undefined cells

    RegionMap(Window w, int nx_, int ny_);

    double x_at(int ix) const noexcept { return window.x0 + (ix + 0.5) * (window.x1 - window.x0) / nx; }
    double y_at(int iy) const noexcept { return window.y0 + (iy + 0.5) * (window.y1 - window.y0) / ny; }
    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * nx + ix]; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
};

enum class RootClass { AllInside = 0, OnCircle = 1, Coexist = 2, AllOutside = 3, Repeated = 4 };

std::string_view to_string(RootClass c) noexcept;

/// Band around the unit circle used when classifying characteristic roots.
inline constexpr double kUnitCircleBand = 1e-12;

/// |p(xi)|. Throws PoleError at a pole of p.
double one_step_modulus(const OneStepScheme& s, Complex xi);
double one_step_modulus(SchemeId id, Complex xi);

/// |p(xi)| <= 1; false at poles (BE: |1 - xi| >= 1).
bool one_step_member(const OneStepScheme& s, Complex xi);

/// Roots of rho(z) - xi kappa(z). Throws SingularStepError when the leading
/// coefficient alpha_k - xi beta_k vanishes.
RootSet lmm_characteristic_roots(const MultistepScheme& s, Complex xi);

/// Classification of a root set: repeated roots take precedence; otherwise
/// roots are counted inside (|z| < 1 - band), on (within band) or outside.
RootClass classify_roots(const RootSet& rs, double band = kUnitCircleBand);

/// Classification of the characteristic roots at xi. A vanishing leading
/// coefficient counts as a root at infinity.
RootClass lmm_membership(const MultistepScheme& s, Complex xi);
RootClass lmm_membership(SchemeId id, Complex xi);

/// True iff every characteristic root satisfies |z| < 1 - band.
bool in_absolute_stability_region(const MultistepScheme& s, Complex xi);

struct BoundaryLocus {
    std::vector<double> theta;
    std::vector<Complex> points;
    std::vector<int> omitted;  // sample indices where kappa(e^{i theta}) == 0
};

/// xi(theta) = rho(e^{i theta}) / kappa(e^{i theta}), theta_j = 2 pi j / n.
BoundaryLocus boundary_locus(const MultistepScheme& s, int n_theta);
BoundaryLocus boundary_locus(SchemeId id, int n_theta);

/// Per-cell |p(xi)| (infinite and flagged at poles).
RegionMap one_step_region(const OneStepScheme& s, Window w, int nx, int ny);

/// Per-cell RootClass code over the xi window.
RegionMap classification_map(const MultistepScheme& s, Window w, int nx, int ny);

/// Per-cell sign (-1, 0, +1) of Re(rho(e^{a + i theta}) / kappa(e^{a + i theta}))
/// over an (a, theta) window. Pole cells are flagged and hold 0.
RegionMap re_sign_map(const MultistepScheme& s, Window w, int nx, int ny);

/// xi at which the two-step characteristic quadratic has a double root,
/// from the zeros of its discriminant (a quadratic in xi).
/// Throws UnsupportedError unless k == 2.
std::vector<Complex> repeated_root_locus(const MultistepScheme& s);
std::vector<Complex> repeated_root_locus(SchemeId id);

/// Discriminant of rho(z) - xi kappa(z) for a two-step scheme.
Complex two_step_discriminant(const MultistepScheme& s, Complex xi);

}  // namespace stepfit
