#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hesspec {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Generic numerical failure (eigensolver, factorization, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

/// 1 + g*delta vanished at a quadrature node: z is inside or too close to the spectrum.
class PoleError : public NumericError {
public:
    PoleError(std::size_t node, double g, std::complex<double> delta);

    std::size_t node() const noexcept { return node_; }
    double g() const noexcept { return g_; }
    std::complex<double> delta() const noexcept { return delta_; }

private:
    std::size_t node_;
    double g_;
    std::complex<double> delta_;
};

class NonConvergence : public NumericError {
public:
    NonConvergence(const std::string& what, double residual)
        : NumericError(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// The fixed point converged, but not to the Stieltjes branch.
class BranchViolation : public NumericError {
public:
    using NumericError::NumericError;
};

/// det G(z) picked up an imaginary part at a supposedly real exterior point.
class ImaginaryLeak : public NumericError {
public:
    using NumericError::NumericError;
};

/// G(lambda) has a zero eigenvalue that is not simple.
class MultiplicityViolation : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace hesspec
