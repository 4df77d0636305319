#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace detsplit {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit the operation.
struct DimensionError : Error {
    using Error::Error;
};

struct ArgumentError : Error {
    using Error::Error;
};

/// A matrix failed the idempotent/self-adjoint checks of a projection.
struct InvalidProjection : Error {
    using Error::Error;
};

/// Eigenvalue inside the forbidden band (-gap_tol, 0): the constant-rank
/// assumption on the boundary family is violated.
struct DegenerateSpectrum : Error {
    using Error::Error;
};

/// Restricted Toeplitz map has a singular value below 1/cond_tol.
struct NearSingular : Error {
    double smallest_singular_value;
    NearSingular(const std::string& what, double sigma)
        : Error(what), smallest_singular_value(sigma) {}
};

struct OutOfChart : Error {
    using Error::Error;
};

struct OutOfDomain : Error {
    using Error::Error;
};

struct CoverageError : Error {
    using Error::Error;
};

/// A normalized link overlap vanished; the grid is too coarse.
struct VortexOnLink : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace detsplit
