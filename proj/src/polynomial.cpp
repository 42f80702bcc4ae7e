#include "stepfit/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace stepfit {

Polynomial::Polynomial(std::initializer_list<Complex> coeffs) : coeffs_(coeffs) { trim(); }

Polynomial::Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

Polynomial Polynomial::from_real(std::span<const double> coeffs) {
    return Polynomial(std::vector<Complex>(coeffs.begin(), coeffs.end()));
}

void Polynomial::trim() {
    while (coeffs_.size() > 1 && coeffs_.back() == Complex{0.0}) coeffs_.pop_back();
    if (coeffs_.empty()) coeffs_.push_back(Complex{0.0});
}

bool Polynomial::is_zero() const noexcept {
    return coeffs_.size() == 1 && coeffs_[0] == Complex{0.0};
}

Complex Polynomial::operator()(Complex z) const noexcept {
    Complex acc{0.0};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

void Polynomial::evaluate_with_derivative(Complex z, Complex& value, Complex& deriv) const noexcept {
    value = Complex{0.0};
    deriv = Complex{0.0};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        deriv = deriv * z + value;
        value = value * z + *it;
    }
}

double Polynomial::magnitude_bound(Complex z) const noexcept {
    const double r = std::abs(z);
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
}

double Polynomial::max_abs_coeff() const noexcept {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

Polynomial Polynomial::derivative() const {
    if (coeffs_.size() <= 1) return Polynomial{};
    std::vector<Complex> d(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
    return Polynomial(std::move(d));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Complex> c(std::max(a.coeffs_.size(), b.coeffs_.size()), Complex{0.0});
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
    for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
    return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + Complex{-1.0} * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<Complex> c(a.coeffs_.size() + b.coeffs_.size() - 1, Complex{0.0});
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(c));
}

Polynomial operator*(Complex s, const Polynomial& p) {
    std::vector<Complex> c = p.coeffs_;
    for (auto& x : c) x *= s;
    return Polynomial(std::move(c));
}

Polynomial Polynomial::from_roots(std::span<const Complex> roots) {
    Polynomial p{Complex{1.0}};
    for (const auto& r : roots) p = p * Polynomial{-r, Complex{1.0}};
    return p;
}

}  // namespace stepfit
