#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

namespace netmor {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// State-and-input dependent term G(x, u) of the unified system.
using NonlinearTerm = std::function<Vector(const Vector&, const Vector&)>;

/// Contract violations detected while building a model (bad dimensions,
/// inconsistent topology, out-of-range physical parameters).
struct ValidationError : std::invalid_argument {
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Runtime numerical failures (singular factorization, diverged state,
/// nonphysical intermediate values).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Errors raised while reading or validating a config file.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace netmor
