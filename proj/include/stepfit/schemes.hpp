#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "stepfit/polynomial.hpp"

namespace stepfit {

enum class SchemeId {
    FE,
    BE,
    RK2,
    RK3,
    RK4,
    ITRAP,
    IMID,
    AB2,
    AB3,
    AB4,
    AM2,
    AM3,
    AM4,
    BDF2,
    LEAPFROG,
};

inline constexpr std::array<SchemeId, 15> kAllSchemes = {
    SchemeId::FE,  SchemeId::BE,  SchemeId::RK2, SchemeId::RK3,  SchemeId::RK4,
    SchemeId::ITRAP, SchemeId::IMID, SchemeId::AB2, SchemeId::AB3, SchemeId::AB4,
    SchemeId::AM2, SchemeId::AM3, SchemeId::AM4, SchemeId::BDF2, SchemeId::LEAPFROG,
};

inline constexpr std::array<SchemeId, 7> kOneStepSchemes = {
    SchemeId::FE, SchemeId::BE, SchemeId::RK2, SchemeId::RK3, SchemeId::RK4, SchemeId::ITRAP, SchemeId::IMID,
};

inline constexpr std::array<SchemeId, 8> kMultistepSchemes = {
    SchemeId::AB2, SchemeId::AB3, SchemeId::AB4, SchemeId::AM2,
    SchemeId::AM3, SchemeId::AM4, SchemeId::BDF2, SchemeId::LEAPFROG,
};

/// Lowercase CLI token ("fe", "rk4", "leapfrog", ...).
std::string_view to_string(SchemeId id) noexcept;

/// Inverse of to_string. Throws LookupError on unknown tokens.
SchemeId parse_scheme_id(std::string_view token);

bool is_one_step(SchemeId id) noexcept;

/// One-step integrator described by its amplification function
/// p(xi) = p_num(xi) / p_den(xi), xi = lambda h.
struct OneStepScheme {
    std::string name;
    Polynomial p_num;
    Polynomial p_den;
    int order = 1;
    bool implicit = false;

    /// p(xi). Throws PoleError when p_den(xi) vanishes.
    Complex amplification(Complex xi) const;
};

/// Linear multistep method sum_j alpha_j z_{n+j} = xi sum_j beta_j z_{n+j},
/// normalised so that alpha[k] == 1.
struct MultistepScheme {
    std::string name;
    int k = 1;
    std::vector<double> alpha;
    std::vector<double> beta;
    int order = 1;

    Polynomial rho() const { return Polynomial::from_real(alpha); }
    Polynomial kappa() const { return Polynomial::from_real(beta); }
    bool implicit() const noexcept { return beta.back() != 0.0; }

    /// User-supplied coefficients. alpha is rescaled to be monic; the method
    /// must satisfy rho(1) == 0. The order is derived from the order
    /// conditions.
    static MultistepScheme custom(std::string name, int k, std::vector<double> alpha, std::vector<double> beta);
};

using Scheme = std::variant<OneStepScheme, MultistepScheme>;

/// Canonical registry descriptor.
const Scheme& lookup(SchemeId id);

/// Like lookup, but throws UnsupportedError if the scheme is not one-step.
const OneStepScheme& one_step(SchemeId id);

/// Like lookup, but throws UnsupportedError if the scheme is not multistep.
const MultistepScheme& multistep(SchemeId id);

/// p(xi) for a registry scheme.
Complex amplification(const OneStepScheme& s, Complex xi);

/// (rho(z), kappa(z)).
std::pair<Complex, Complex> rho_kappa(const MultistepScheme& s, Complex z);

/// (rho(e^x), kappa(e^x)) evaluated so that rho keeps full relative accuracy
/// when x is small (rho(1) == 0 for consistent methods).
std::pair<Complex, Complex> rho_kappa_at_exp(const MultistepScheme& s, Complex x);

/// Largest p such that the LMM order conditions C_0..C_p vanish (to tol).
int lmm_order(std::span<const double> alpha, std::span<const double> beta, double tol = 1e-12);

/// Parses {"k": int, "alpha": [...], "beta": [...]} (optional "name").
/// Throws LookupError on malformed input.
MultistepScheme multistep_from_json(std::string_view text);

}  // namespace stepfit
