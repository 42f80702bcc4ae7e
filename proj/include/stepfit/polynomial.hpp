#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

namespace stepfit {

using Complex = std::complex<double>;

/// Complex polynomial with coefficients stored in ascending degree order.
///
/// Trailing (highest-degree) zero coefficients are trimmed on construction,
/// so the leading coefficient is nonzero unless the polynomial is the zero
/// polynomial, which is stored as a single zero coefficient.
class Polynomial {
public:
    Polynomial() : coeffs_{Complex{0.0}} {}
    Polynomial(std::initializer_list<Complex> coeffs);
    explicit Polynomial(std::vector<Complex> coeffs);
    static Polynomial from_real(std::span<const double> coeffs);

    std::span<const Complex> coeffs() const noexcept { return coeffs_; }
    const Complex& operator[](std::size_t i) const { return coeffs_[i]; }

    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const noexcept;
    Complex leading() const noexcept { return coeffs_.back(); }

    /// Horner evaluation.
    Complex operator()(Complex z) const noexcept;

    /// Value and first derivative in one Horner pass.
    void evaluate_with_derivative(Complex z, Complex& value, Complex& deriv) const noexcept;

    /// sum_i |c_i| |z|^i, the natural scale of rounding errors in P(z).
    double magnitude_bound(Complex z) const noexcept;

    double max_abs_coeff() const noexcept;

    Polynomial derivative() const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(Complex s, const Polynomial& p);
    friend bool operator==(const Polynomial& a, const Polynomial& b) = default;

    /// Monic polynomial with the given roots, prod_j (z - r_j).
    static Polynomial from_roots(std::span<const Complex> roots);

private:
    void trim();
    std::vector<Complex> coeffs_;
};

}  // namespace stepfit
