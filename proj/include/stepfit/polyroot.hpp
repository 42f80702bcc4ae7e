#pragma once

#include <utility>
#include <vector>

#include "stepfit/polynomial.hpp"

namespace stepfit {

struct RootSet {
    std::vector<Complex> roots;
    std::vector<double> residuals;       // |P(root)|
    std::vector<bool> multiplicity_flags;  // root lies within 10 tol of another root

    std::size_t size() const noexcept { return roots.size(); }
    bool has_repeated() const noexcept;
};

/// Default residual tolerance for P: 1e-12 * max |coeff|.
double default_root_tol(const Polynomial& p);

/// All roots of P by simultaneous Aberth-Ehrlich iteration (no deflation).
///
/// A root is accepted when |P(root)| <= max(tol, rounding level of P at the
/// root). Pairs of iterates that collapse onto a repeated root are merged on
/// the zero of P' between them, so that exact repeated roots are reported as
/// coincident and flagged. Throws IterationError (with the worst iterate) if
/// the iteration does not converge, DegenerateError for constant P.
RootSet roots(const Polynomial& p, double tol);
RootSet roots(const Polynomial& p);

/// Closed-form roots of a x^2 + b x + c. The larger-magnitude root is
/// computed first and returned first; the other follows from the product
/// c/a. Throws DegenerateError when a == 0.
std::pair<Complex, Complex> quadratic_roots(Complex a, Complex b, Complex c);

}  // namespace stepfit
