#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stepfit/polyroot.hpp"
#include "stepfit/schemes.hpp"

namespace stepfit {

/// Global minimiser of the noise-free trajectory-fitting problem for
/// dz/dt = lambda z under a fixed scheme and step.
struct LearnedEigen {
    std::string scheme;
    Complex lambda_true;
    double h = 0.0;
    RootSet candidates;  // one-step only; empty for multistep schemes
    Complex selected;    // lambda_hat * h
    Complex lambda_hat;
    bool in_stability_region = false;
    bool nyquist_ok = false;
    std::string selection;  // how `selected` was chosen
};

enum class ReSign { Neg, Zero, Pos, Unclassified };
enum class ImMatch { Yes, No, Unclassified };
enum class PhaseClass { Leading, Lagging, Exact };

std::string_view to_string(ReSign s) noexcept;
std::string_view to_string(ImMatch s) noexcept;
std::string_view to_string(PhaseClass c) noexcept;

struct SignPrediction {
    ReSign re_sign = ReSign::Unclassified;
    ImMatch im_sign_matches_true = ImMatch::Unclassified;
    std::string condition_notes;
};

struct PhaseReport {
    double a = 0.0;      // Re(lambda h)
    double theta = 0.0;  // Im(lambda h)
    double im_hat = 0.0; // Im(lambda_hat h)
    PhaseClass classification = PhaseClass::Exact;
};

/// -pi < Im(lambda h) < pi.
bool nyquist_ok(Complex lambda, double h);

/// Solves p(xi) = e^{lambda h}. BE and the trapezoidal/midpoint rules use
/// their closed forms; the explicit Runge-Kutta family returns all roots as
/// candidates and selects the one of minimal modulus (ties within 1e-9 go to
/// the root whose imaginary part has the sign of Im(lambda)).
LearnedEigen learn_one_step(SchemeId id, Complex lambda, double h);
LearnedEigen learn_one_step(const OneStepScheme& s, Complex lambda, double h);

/// xi = rho(e^{lambda h}) / kappa(e^{lambda h}).
LearnedEigen learn_lmm(SchemeId id, Complex lambda, double h);
LearnedEigen learn_lmm(const MultistepScheme& s, Complex lambda, double h);

/// Dispatches to learn_one_step or learn_lmm.
LearnedEigen learn(SchemeId id, Complex lambda, double h);

/// rho(e^x)/kappa(e^x) for x = lambda h; throws PoleError when kappa vanishes.
Complex lmm_learned_xi(const MultistepScheme& s, Complex lambda_h);

/// Sign of Re(lambda_hat) and whether sign(Im lambda_hat) == sign(Im lambda),
/// as far as the known characterisation results for the scheme reach.
/// Outside their hypotheses the prediction is Unclassified.
SignPrediction predict_signs(SchemeId id, Complex lambda, double h);

/// Closed-form Im(lambda_hat h) for data e^{a + i theta}. Supported schemes:
/// FE, BE, RK2, ITRAP (and IMID), LEAPFROG.
PhaseReport phase_error(SchemeId id, double a, double theta);

/// leading iff |im_hat| > |theta|, lagging iff <, exact within 1e-14.
PhaseClass classify_phase(double im_hat, double theta);

/// (4 fine - coarse) / 3 for learned eigenvalues at steps h and 2h.
Complex richardson(Complex fine, Complex coarse);

/// Window |Im(lambda h)| < 4 atan(sqrt((11 - 4 sqrt 7)/3)) on which the
/// extrapolated trapezoidal eigenvalue keeps Re == 0 and the rotation sign.
double extrapolation_conservative_window();

/// Admissible (a, b) = (Re, Im)(lambda h) set, a < 0, for which the
/// extrapolated trapezoidal eigenvalue stays dissipative with the same
/// rotation sign. Symmetric in b.
bool extrapolation_dissipative_admissible(double a, double b);

enum class ErrorMeasure {
    Eigenvalue,  // |lambda_hat - lambda|
    Scaled,      // |lambda_hat h - lambda h|
};

/// Default step ladder {2^-4, ..., 2^-9} / |lambda|.
std::vector<double> default_order_steps(Complex lambda);

/// Per-h learning errors for the convergence study.
std::vector<double> learning_errors(SchemeId id, Complex lambda, std::span<const double> h_list,
                                    ErrorMeasure measure = ErrorMeasure::Eigenvalue);

/// Least-squares slope of log(error) against log(h). h_list must be strictly
/// decreasing, have >= 4 entries and satisfy the Nyquist condition.
double convergence_order(SchemeId id, Complex lambda, std::span<const double> h_list,
                         ErrorMeasure measure = ErrorMeasure::Eigenvalue);

}  // namespace stepfit
