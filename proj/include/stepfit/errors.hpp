#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace stepfit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown scheme identifier or malformed scheme description.
class LookupError : public Error {
public:
    using Error::Error;
};

/// A rational function was evaluated at (or numerically on top of) a pole.
class PoleError : public Error {
public:
    using Error::Error;
};

/// The operation is not defined for the requested scheme or input.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Degenerate input, e.g. a quadratic with vanishing leading coefficient.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Repeated characteristic roots where distinct roots are required.
class MultiplicityError : public Error {
public:
    using Error::Error;
};

/// The implicit step of a scheme is singular (alpha_k - xi * beta_k == 0, or
/// a singular implicit matrix solve).
class SingularStepError : public Error {
public:
    using Error::Error;
};

/// The sampling step violates -pi < Im(lambda h) < pi.
class NyquistError : public Error {
public:
    using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
public:
    using Error::Error;
};

/// An iterative method stopped before reaching its tolerance. Carries the
/// best iterate found so callers can still inspect it.
class IterationError : public Error {
public:
    IterationError(const std::string& what, std::complex<double> best)
        : Error(what), best_(best) {}

    std::complex<double> best() const noexcept { return best_; }

private:
    std::complex<double> best_;
};

}  // namespace stepfit
