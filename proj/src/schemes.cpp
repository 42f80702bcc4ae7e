#include "stepfit/schemes.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "stepfit/errors.hpp"
#include "stepfit/numerics.hpp"

namespace stepfit {
namespace {

struct Token {
    SchemeId id;
    std::string_view name;
};

constexpr std::array<Token, 15> kTokens = {{
    {SchemeId::FE, "fe"},       {SchemeId::BE, "be"},     {SchemeId::RK2, "rk2"},
    {SchemeId::RK3, "rk3"},     {SchemeId::RK4, "rk4"},   {SchemeId::ITRAP, "itrap"},
    {SchemeId::IMID, "imid"},   {SchemeId::AB2, "ab2"},   {SchemeId::AB3, "ab3"},
    {SchemeId::AB4, "ab4"},     {SchemeId::AM2, "am2"},   {SchemeId::AM3, "am3"},
    {SchemeId::AM4, "am4"},     {SchemeId::BDF2, "bdf2"}, {SchemeId::LEAPFROG, "leapfrog"},
}};

OneStepScheme make_one_step(std::string name, Polynomial num, Polynomial den, int order, bool implicit) {
    return OneStepScheme{std::move(name), std::move(num), std::move(den), order, implicit};
}

MultistepScheme make_lmm(std::string name, std::vector<double> alpha, std::vector<double> beta, int order) {
    const int k = static_cast<int>(alpha.size()) - 1;
    return MultistepScheme{std::move(name), k, std::move(alpha), std::move(beta), order};
}

// Truncated exponential sum_{j<=p} xi^j / j!.
Polynomial taylor_exp(int p) {
    std::vector<Complex> c(p + 1);
    double f = 1.0;
    for (int j = 0; j <= p; ++j) {
        if (j > 0) f *= j;
        c[j] = 1.0 / f;
    }
    return Polynomial(std::move(c));
}

std::array<Scheme, 15> build_registry() {
    const Polynomial one{Complex{1.0}};
    const Polynomial trap_num{Complex{1.0}, Complex{0.5}};
    const Polynomial trap_den{Complex{1.0}, Complex{-0.5}};
    return {
        make_one_step("fe", taylor_exp(1), one, 1, false),
        make_one_step("be", one, Polynomial{Complex{1.0}, Complex{-1.0}}, 1, true),
        make_one_step("rk2", taylor_exp(2), one, 2, false),
        make_one_step("rk3", taylor_exp(3), one, 3, false),
        make_one_step("rk4", taylor_exp(4), one, 4, false),
        make_one_step("itrap", trap_num, trap_den, 2, true),
        // The midpoint rule has the trapezoidal amplification on linear problems.
        make_one_step("imid", trap_num, trap_den, 2, true),
        make_lmm("ab2", {0.0, -1.0, 1.0}, {-0.5, 1.5, 0.0}, 2),
        make_lmm("ab3", {0.0, 0.0, -1.0, 1.0}, {5.0 / 12, -16.0 / 12, 23.0 / 12, 0.0}, 3),
        make_lmm("ab4", {0.0, 0.0, 0.0, -1.0, 1.0}, {-9.0 / 24, 37.0 / 24, -59.0 / 24, 55.0 / 24, 0.0}, 4),
        make_lmm("am2", {-1.0, 1.0}, {0.5, 0.5}, 2),
        make_lmm("am3", {0.0, -1.0, 1.0}, {-1.0 / 12, 8.0 / 12, 5.0 / 12}, 3),
        make_lmm("am4", {0.0, 0.0, 0.0, -1.0, 1.0},
                 {-19.0 / 720, 106.0 / 720, -264.0 / 720, 646.0 / 720, 251.0 / 720}, 5),
        make_lmm("bdf2", {1.0 / 3, -4.0 / 3, 1.0}, {0.0, 0.0, 2.0 / 3}, 2),
        make_lmm("leapfrog", {-1.0, 0.0, 1.0}, {0.0, 2.0, 0.0}, 2),
    };
}

}  // namespace

std::string_view to_string(SchemeId id) noexcept {
    for (const auto& t : kTokens)
        if (t.id == id) return t.name;
    return "?";
}

SchemeId parse_scheme_id(std::string_view token) {
    for (const auto& t : kTokens)
        if (t.name == token) return t.id;
    throw LookupError("unknown scheme '" + std::string(token) + "'");
}

bool is_one_step(SchemeId id) noexcept {
    return std::holds_alternative<OneStepScheme>(lookup(id));
}

const Scheme& lookup(SchemeId id) {
    static const std::array<Scheme, 15> registry = build_registry();
    const auto idx = static_cast<std::size_t>(id);
    if (idx >= registry.size()) throw LookupError("scheme id out of range");
    return registry[idx];
}

const OneStepScheme& one_step(SchemeId id) {
    const auto* s = std::get_if<OneStepScheme>(&lookup(id));
    if (s == nullptr) throw UnsupportedError(std::string(to_string(id)) + " is not a one-step scheme");
    return *s;
}

const MultistepScheme& multistep(SchemeId id) {
    const auto* s = std::get_if<MultistepScheme>(&lookup(id));
    if (s == nullptr) throw UnsupportedError(std::string(to_string(id)) + " is not a multistep scheme");
    return *s;
}

Complex OneStepScheme::amplification(Complex xi) const {
    const Complex den = p_den(xi);
    const double scale = p_den.magnitude_bound(xi);
    if (std::abs(den) <= 4.0 * std::numeric_limits<double>::epsilon() * scale)
        throw PoleError(name + ": amplification has a pole at xi = (" + std::to_string(xi.real()) + ", " +
                        std::to_string(xi.imag()) + ")");
    return p_num(xi) / den;
}

Complex amplification(const OneStepScheme& s, Complex xi) { return s.amplification(xi); }

std::pair<Complex, Complex> rho_kappa(const MultistepScheme& s, Complex z) {
    return {s.rho()(z), s.kappa()(z)};
}

std::pair<Complex, Complex> rho_kappa_at_exp(const MultistepScheme& s, Complex x) {
    // rho(e^x) = rho(1) + sum_j alpha_j (e^{jx} - 1)
    Complex rho{0.0};
    double rho1 = 0.0;
    for (int j = 0; j <= s.k; ++j) {
        rho1 += s.alpha[j];
        if (j > 0 && s.alpha[j] != 0.0) rho += s.alpha[j] * expm1(static_cast<double>(j) * x);
    }
    rho += rho1;
    Complex kappa{0.0};
    for (int j = 0; j <= s.k; ++j)
        if (s.beta[j] != 0.0) kappa += s.beta[j] * std::exp(static_cast<double>(j) * x);
    return {rho, kappa};
}

int lmm_order(std::span<const double> alpha, std::span<const double> beta, double tol) {
    const int k = static_cast<int>(alpha.size()) - 1;
    auto condition = [&](int q) {
        double a = 0.0, b = 0.0, scale = 0.0;
        for (int j = 0; j <= k; ++j) {
            const double jq = std::pow(static_cast<double>(j), q);
            a += jq * alpha[j];
            scale += jq * std::abs(alpha[j]);
            if (q >= 1) {
                const double jq1 = std::pow(static_cast<double>(j), q - 1);
                b += jq1 * beta[j] * q;
                scale += jq1 * std::abs(beta[j]) * q;
            }
        }
        // q! C_q = sum j^q alpha_j - q sum j^{q-1} beta_j
        return std::abs(a - b) <= tol * std::max(1.0, scale);
    };
    if (!condition(0)) return -1;
    int p = 0;
    while (p < 2 * k + 2 && condition(p + 1)) ++p;
    return p;
}

MultistepScheme MultistepScheme::custom(std::string name, int k, std::vector<double> alpha, std::vector<double> beta) {
    if (k < 1) throw LookupError("custom LMM: k must be >= 1");
    if (alpha.size() != static_cast<std::size_t>(k + 1) || beta.size() != static_cast<std::size_t>(k + 1))
        throw LookupError("custom LMM: alpha and beta need k+1 entries");
    if (alpha.back() == 0.0) throw LookupError("custom LMM: alpha_k must be nonzero");
    const double lead = alpha.back();
    for (auto& a : alpha) a /= lead;
    for (auto& b : beta) b /= lead;
    alpha.back() = 1.0;
    const int order = lmm_order(alpha, beta);
    if (order < 0) throw LookupError("custom LMM: rho(1) != 0, method is not consistent");
    return MultistepScheme{std::move(name), k, std::move(alpha), std::move(beta), order};
}

MultistepScheme multistep_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw LookupError(std::string("custom LMM: invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("k") || !j.contains("alpha") || !j.contains("beta"))
        throw LookupError("custom LMM: expected object with keys k, alpha, beta");
    try {
        const int k = j.at("k").get<int>();
        auto alpha = j.at("alpha").get<std::vector<double>>();
        auto beta = j.at("beta").get<std::vector<double>>();
        const std::string name = j.value("name", std::string("custom"));
        return MultistepScheme::custom(name, k, std::move(alpha), std::move(beta));
    } catch (const nlohmann::json::exception& e) {
        throw LookupError(std::string("custom LMM: ") + e.what());
    }
}

}  // namespace stepfit
