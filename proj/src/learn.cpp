#include "stepfit/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stepfit/errors.hpp"
#include "stepfit/numerics.hpp"
#include "stepfit/stability.hpp"

namespace stepfit {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPi = std::numbers::pi;
constexpr double kTieTol = 1e-9;

// Closed |p| <= 1 with a rounding band, so that learned values on the
// boundary (conservative data) count as members.
constexpr double kMemberBand = 1e-12;

int im_sign(Complex z) { return sign_of(z.imag()); }

void finish_one_step(LearnedEigen& r, const OneStepScheme& s) {
    r.lambda_hat = r.selected / r.h;
    try {
        r.in_stability_region = std::abs(s.amplification(r.selected)) <= 1.0 + kMemberBand;
    } catch (const PoleError&) {
        r.in_stability_region = false;
    }
}

// Roots of p_num(xi) - w p_den(xi), with the constant term built from
// expm1 so that small lambda h keeps its relative accuracy.
Polynomial shifted_polynomial(const OneStepScheme& s, Complex x) {
    const Complex w = std::exp(x);
    const Complex wm1 = expm1(x);
    const std::size_t n = std::max(s.p_num.coeffs().size(), s.p_den.coeffs().size());
    std::vector<Complex> c(n, Complex{0.0});
    for (std::size_t i = 0; i < n; ++i) {
        const Complex a = i < s.p_num.coeffs().size() ? s.p_num[i] : Complex{0.0};
        const Complex b = i < s.p_den.coeffs().size() ? s.p_den[i] : Complex{0.0};
        c[i] = (i == 0) ? (a - b) - wm1 * b : a - w * b;
    }
    return Polynomial(std::move(c));
}

LearnedEigen learn_generic(const OneStepScheme& s, Complex lambda, double h) {
    LearnedEigen r;
    r.scheme = s.name;
    r.lambda_true = lambda;
    r.h = h;
    r.nyquist_ok = nyquist_ok(lambda, h);
    const Complex x = lambda * h;
    const Polynomial P = shifted_polynomial(s, x);

    if (P.degree() < 1) {
        if (P.is_zero()) throw DegenerateError(s.name + ": p(xi) == e^{lambda h} identically");
        throw DegenerateError(s.name + ": p(xi) = e^{lambda h} has no solution");
    }
    if (P.degree() == 1) {
        r.selected = -P[0] / P[1];
        r.candidates.roots = {r.selected};
        r.candidates.residuals = {std::abs(P(r.selected))};
        r.candidates.multiplicity_flags = {false};
        r.selection = "unique root";
        finish_one_step(r, s);
        return r;
    }

    r.candidates = roots(P);
    const auto& z = r.candidates.roots;
    std::size_t best = 0;
    for (std::size_t j = 1; j < z.size(); ++j)
        if (std::abs(z[j]) < std::abs(z[best])) best = j;
    r.selection = "minimal modulus";
    const int want = sign_of(lambda.imag());
    if (im_sign(z[best]) != want) {
        for (std::size_t j = 0; j < z.size(); ++j) {
            if (j == best) continue;
            if (std::abs(std::abs(z[j]) - std::abs(z[best])) <= kTieTol && im_sign(z[j]) == want) {
                best = j;
                r.selection = "minimal modulus, tie broken by sign of Im(lambda)";
                break;
            }
        }
    }
    r.selected = z[best];
    finish_one_step(r, s);
    return r;
}

LearnedEigen learn_closed(const OneStepScheme& s, Complex lambda, double h, Complex selected,
                          const char* how) {
    LearnedEigen r;
    r.scheme = s.name;
    r.lambda_true = lambda;
    r.h = h;
    r.nyquist_ok = nyquist_ok(lambda, h);
    r.selected = selected;
    r.candidates.roots = {selected};
    r.candidates.residuals = {std::abs(s.p_num(selected) - std::exp(lambda * h) * s.p_den(selected))};
    r.candidates.multiplicity_flags = {false};
    r.selection = how;
    finish_one_step(r, s);
    return r;
}

bool within_nyquist(Complex x) { return x.imag() > -kPi && x.imag() < kPi; }

}  // namespace

std::string_view to_string(ReSign s) noexcept {
    switch (s) {
        case ReSign::Neg: return "neg";
        case ReSign::Zero: return "zero";
        case ReSign::Pos: return "pos";
        case ReSign::Unclassified: return "unclassified";
    }
    return "?";
}

std::string_view to_string(ImMatch s) noexcept {
    switch (s) {
        case ImMatch::Yes: return "yes";
        case ImMatch::No: return "no";
        case ImMatch::Unclassified: return "unclassified";
    }
    return "?";
}

std::string_view to_string(PhaseClass c) noexcept {
    switch (c) {
        case PhaseClass::Leading: return "leading";
        case PhaseClass::Lagging: return "lagging";
        case PhaseClass::Exact: return "exact";
    }
    return "?";
}

bool nyquist_ok(Complex lambda, double h) { return within_nyquist(lambda * h); }

LearnedEigen learn_one_step(const OneStepScheme& s, Complex lambda, double h) {
    if (!(h > 0.0)) throw DegenerateError("learn: h must be positive");
    return learn_generic(s, lambda, h);
}

LearnedEigen learn_one_step(SchemeId id, Complex lambda, double h) {
    if (!(h > 0.0)) throw DegenerateError("learn: h must be positive");
    const OneStepScheme& s = one_step(id);
    const Complex x = lambda * h;
    switch (id) {
        case SchemeId::BE:
            return learn_closed(s, lambda, h, -expm1(-x), "closed form 1 - e^{-lambda h}");
        case SchemeId::ITRAP:
        case SchemeId::IMID: {
            const Complex w = std::exp(x);
            if (std::abs(w + 1.0) <= 8.0 * kEps)
                throw PoleError(s.name + ": e^{lambda h} = -1 has no preimage under p");
            return learn_closed(s, lambda, h, 2.0 * std::tanh(0.5 * x), "closed form 2 tanh(lambda h / 2)");
        }
        default:
            return learn_generic(s, lambda, h);
    }
}

Complex lmm_learned_xi(const MultistepScheme& s, Complex lambda_h) {
    const auto [rho, kappa] = rho_kappa_at_exp(s, lambda_h);
    double scale = 0.0;
    for (int j = 0; j <= s.k; ++j) scale += std::abs(s.beta[j]) * std::exp(j * lambda_h.real());
    if (std::abs(kappa) <= 4.0 * kEps * scale)
        throw PoleError(s.name + ": kappa(e^{lambda h}) vanishes");
    return rho / kappa;
}

LearnedEigen learn_lmm(const MultistepScheme& s, Complex lambda, double h) {
    if (!(h > 0.0)) throw DegenerateError("learn: h must be positive");
    LearnedEigen r;
    r.scheme = s.name;
    r.lambda_true = lambda;
    r.h = h;
    r.nyquist_ok = nyquist_ok(lambda, h);
    r.selected = lmm_learned_xi(s, lambda * h);
    r.lambda_hat = r.selected / h;
    r.selection = "closed form rho(e^{lambda h}) / kappa(e^{lambda h})";
    try {
        const RootSet rs = lmm_characteristic_roots(s, r.selected);
        double top = 0.0;
        for (const auto& z : rs.roots) top = std::max(top, std::abs(z));
        r.in_stability_region = top <= 1.0 + 1e-10;
    } catch (const Error&) {
        r.in_stability_region = false;
    }
    return r;
}

LearnedEigen learn_lmm(SchemeId id, Complex lambda, double h) { return learn_lmm(multistep(id), lambda, h); }

LearnedEigen learn(SchemeId id, Complex lambda, double h) {
    return is_one_step(id) ? learn_one_step(id, lambda, h) : learn_lmm(id, lambda, h);
}

SignPrediction predict_signs(SchemeId id, Complex lambda, double h) {
    SignPrediction out;
    const Complex x = lambda * h;
    if (!within_nyquist(x)) {
        out.condition_notes = "Nyquist condition violated";
        return out;
    }
    if (x == Complex{0.0}) {
        out.re_sign = ReSign::Zero;
        out.im_sign_matches_true = ImMatch::Yes;
        out.condition_notes = "lambda h = 0";
        return out;
    }
    const double a = x.real();
    const double theta = x.imag();
    const Complex w = std::exp(x);
    const double dist = std::abs(expm1(x));  // |1 - e^{lambda h}|

    auto set = [&](ReSign re, ImMatch im, std::string note) {
        out.re_sign = re;
        out.im_sign_matches_true = im;
        out.condition_notes = std::move(note);
    };
    auto threshold = [&](double bound, const char* name) {
        if (a != 0.0) {
            out.condition_notes = std::string(name) + ": characterised for conservative data only";
            return;
        }
        const double c = std::cos(theta);
        const std::string b = std::to_string(bound);
        if (c < bound)
            set(ReSign::Neg, ImMatch::Yes, std::string(name) + ": cos(Im lambda h) < " + b);
        else if (c > bound)
            set(ReSign::Pos, ImMatch::Yes, std::string(name) + ": cos(Im lambda h) > " + b);
        else
            set(ReSign::Unclassified, ImMatch::Yes, std::string(name) + ": cos(Im lambda h) on the threshold");
    };

    switch (id) {
        case SchemeId::FE:
            if (a <= 0.0)
                set(ReSign::Neg, ImMatch::Yes, "FE: Re(lambda) <= 0");
            else
                out.condition_notes = "FE: expansive data not characterised";
            break;
        case SchemeId::RK2:
            if (a <= 0.0 && dist <= 0.5)
                set(ReSign::Neg, ImMatch::Yes, "RK2: |1 - e^{lambda h}| <= 1/2");
            else
                out.condition_notes = "RK2: needs Re(lambda) <= 0 and |1 - e^{lambda h}| <= 1/2";
            break;
        case SchemeId::RK3: {
            // delta solves (6 - delta^2) / (2 delta) = sqrt(12.5)
            const double r = std::sqrt(12.5);
            const double delta = -r + std::sqrt(r * r + 6.0);
            if (a == 0.0 && dist <= 1.0 / 6.0)
                set(ReSign::Pos, ImMatch::Yes, "RK3 conservative: |1 - e^{lambda h}| <= 1/6");
            else if (a < 0.0 && 6.0 * dist <= delta * delta && std::abs(w) <= std::sqrt(8.0 / 9.0))
                set(ReSign::Neg, ImMatch::Yes,
                    "RK3 dissipative: 6|1 - e^{lambda h}| <= delta^2, |e^{lambda h}| <= sqrt(8/9), "
                    "(6 - delta^2)/(2 delta) >= sqrt(12.5)");
            else
                out.condition_notes = "RK3: side conditions not met";
            break;
        }
        case SchemeId::RK4:
            out.condition_notes = "RK4: no sign characterisation";
            break;
        case SchemeId::BE:
            if (a == 0.0)
                set(ReSign::Pos, ImMatch::Yes, "BE conservative");
            else if (a < 0.0 && 1.0 - std::exp(-a) * std::cos(theta) < 0.0)
                set(ReSign::Neg, ImMatch::Yes, "BE dissipative: e^{-a} cos(theta) > 1");
            else
                out.condition_notes = "BE: sign depends on e^{-a} cos(theta) - 1";
            break;
        case SchemeId::ITRAP:
        case SchemeId::IMID:
        case SchemeId::AM2:
            if (a == 0.0)
                set(ReSign::Zero, ImMatch::Yes, "trapezoidal: conservative data");
            else if (a < 0.0)
                set(ReSign::Neg, ImMatch::Yes, "trapezoidal: dissipative data");
            else
                set(ReSign::Pos, ImMatch::Yes, "trapezoidal: expansive data");
            break;
        case SchemeId::LEAPFROG: {
            // Re = sinh(a) cos(theta), Im = cosh(a) sin(theta)
            const int s = sign_of(std::sinh(a) * std::cos(theta));
            const ReSign re = s < 0 ? ReSign::Neg : (s > 0 ? ReSign::Pos : ReSign::Zero);
            set(re, ImMatch::Yes, "Leap-Frog: Re = sinh(a) cos(theta)");
            break;
        }
        case SchemeId::AB2:
        case SchemeId::AM3:
            if (a == 0.0)
                set(ReSign::Neg, ImMatch::Yes, "two-step Adams: Re < 0 on the unit circle");
            else
                out.condition_notes = "two-step Adams: characterised for conservative data only";
            break;
        case SchemeId::AB3: threshold(1.0 / 10.0, "AB3"); break;
        case SchemeId::AB4: threshold(-4.0 / 9.0, "AB4"); break;
        case SchemeId::AM4: threshold(11.0 / 38.0, "AM4"); break;
        case SchemeId::BDF2:
            out.condition_notes = "BDF2: sign of Re not fixed on the unit circle";
            break;
    }
    return out;
}

PhaseClass classify_phase(double im_hat, double theta) {
    const double d = std::abs(im_hat) - std::abs(theta);
    if (std::abs(d) <= 1e-14) return PhaseClass::Exact;
    return d > 0.0 ? PhaseClass::Leading : PhaseClass::Lagging;
}

PhaseReport phase_error(SchemeId id, double a, double theta) {
    if (!(theta > -kPi && theta < kPi)) throw NyquistError("phase: theta outside (-pi, pi)");
    PhaseReport r;
    r.a = a;
    r.theta = theta;
    const double s = std::sin(theta);
    switch (id) {
        case SchemeId::FE: r.im_hat = std::exp(a) * s; break;
        case SchemeId::BE: r.im_hat = std::exp(-a) * s; break;
        case SchemeId::RK2: {
            const Complex xi = learn_one_step(SchemeId::RK2, Complex{a, theta}, 1.0).selected;
            r.im_hat = std::exp(a) * s / (1.0 + xi.real());
            break;
        }
        case SchemeId::ITRAP:
        case SchemeId::IMID: {
            const double m = std::norm(std::exp(Complex{a, theta}) + 1.0);
            r.im_hat = 4.0 * std::exp(a) * s / m;
            break;
        }
        case SchemeId::LEAPFROG: r.im_hat = std::cosh(a) * s; break;
        default:
            throw UnsupportedError(std::string("phase: no closed form for ") + std::string(to_string(id)));
    }
    r.classification = classify_phase(r.im_hat, theta);
    return r;
}

Complex richardson(Complex fine, Complex coarse) { return (4.0 * fine - coarse) / 3.0; }

double extrapolation_conservative_window() {
    return 4.0 * std::atan(std::sqrt((11.0 - 4.0 * std::sqrt(7.0)) / 3.0));
}

bool extrapolation_dissipative_admissible(double a, double b) {
    b = std::abs(b);
    if (!(a < 0.0) || !(b > 0.0)) return false;
    const double a0 = -std::acosh(std::sqrt(256.0 / 223.0));
    if (a <= a0) return b < kPi / 2.0;
    const double c = std::cosh(a);
    return b < std::acos((c + std::sqrt(256.0 - 223.0 * c * c)) / 16.0);
}

std::vector<double> default_order_steps(Complex lambda) {
    const double mag = std::abs(lambda);
    if (!(mag > 0.0)) throw DegenerateError("order: lambda must be nonzero");
    std::vector<double> out;
    for (int e = 4; e <= 9; ++e) out.push_back(std::ldexp(1.0, -e) / mag);
    return out;
}

std::vector<double> learning_errors(SchemeId id, Complex lambda, std::span<const double> h_list,
                                    ErrorMeasure measure) {
    std::vector<double> err;
    err.reserve(h_list.size());
    for (double h : h_list) {
        const LearnedEigen r = learn(id, lambda, h);
        const double e = std::abs(r.lambda_hat - lambda);
        err.push_back(measure == ErrorMeasure::Eigenvalue ? e : e * h);
    }
    return err;
}

double convergence_order(SchemeId id, Complex lambda, std::span<const double> h_list, ErrorMeasure measure) {
    if (h_list.size() < 4) throw DegenerateError("order: need at least 4 step sizes");
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        if (!(h_list[i] > 0.0)) throw DegenerateError("order: step sizes must be positive");
        if (i > 0 && !(h_list[i] < h_list[i - 1])) throw DegenerateError("order: h_list must be strictly decreasing");
        if (!nyquist_ok(lambda, h_list[i])) throw NyquistError("order: step violates -pi < Im(lambda h) < pi");
    }
    const std::vector<double> err = learning_errors(id, lambda, h_list, measure);
    return loglog_fit(h_list, err).slope;
}

}  // namespace stepfit
