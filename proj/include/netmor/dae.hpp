#pragma once

#include <utility>
#include <vector>

#include "netmor/types.hpp"

namespace netmor {

/// Unified descriptor form shared by every network domain:
///
///     E x'(t) = A x(t) + B u(t) + G(x, u),   y = C x,
///
/// with E possibly singular. Instances are immutable after construction;
/// every operation on them is pure.
struct UnifiedDae {
    Eigen::Index n = 0;  ///< state dimension
    Eigen::Index m = 0;  ///< input count
    Eigen::Index p = 0;  ///< output count
    Matrix E;
    Matrix A;
    Matrix B;
    Matrix C;
    NonlinearTerm G;  ///< may be empty, meaning G == 0
    /// diff_mask[i] is true for differential rows (E row nonzero) and false
    /// for algebraic rows (E row identically zero).
    std::vector<bool> diff_mask;

    [[nodiscard]] bool has_nonlinearity() const { return static_cast<bool>(G); }

    /// Evaluates G(x, u), treating an empty G as the zero function.
    [[nodiscard]] Vector eval_G(const Vector& x, const Vector& u) const {
        return G ? G(x, u) : Vector(Vector::Zero(n));
    }

    [[nodiscard]] Eigen::Index algebraic_count() const {
        Eigen::Index k = 0;
        for (bool d : diff_mask)
            if (!d) ++k;
        return k;
    }
};

/// E, A, B, C of a UnifiedDae with the nonlinear term dropped. This is what
/// transfer-function evaluation and Krylov basis construction consume.
struct LinearPart {
    Matrix E;
    Matrix A;
    Matrix B;
    Matrix C;

    [[nodiscard]] Eigen::Index n() const { return E.rows(); }
    [[nodiscard]] Eigen::Index m() const { return B.cols(); }
    [[nodiscard]] Eigen::Index p() const { return C.rows(); }
};

/// One transfer-function sample H(s), p x m complex.
struct TransferSample {
    Complex s;
    CMatrix H;
};

/// Validates dimensions, derives diff_mask from the zero rows of E, and
/// probes pencil regularity at sigma = 1 with a fallback at sigma = 2.7183.
/// Throws ValidationError on dimension mismatch or a singular pencil probe.
UnifiedDae make_dae(Matrix E, Matrix A, Matrix B, Matrix C, NonlinearTerm G = {});

/// Variant for systems whose trailing constraint rows are carried entirely by
/// G (both E and A rows zero there, as in the power network). The regularity
/// probe is applied to the pencil restricted to the linearly active
/// rows/columns; the fully nonlinear rows must pair one-to-one with state
/// columns that E and A never touch.
UnifiedDae make_dae_nonlinear_algebraic(Matrix E, Matrix A, Matrix B, Matrix C, NonlinearTerm G);

[[nodiscard]] LinearPart linear_part(const UnifiedDae& dae);

/// Linearization about an operating point: A and B are augmented with the
/// forward-difference Jacobians of G with respect to state and input. For a
/// dissipative nonlinearity this yields the damped small-signal model that
/// interpolatory reduction needs (the plain pencil of a friction-dominated
/// network is only marginally stable).
[[nodiscard]] LinearPart linearize(const UnifiedDae& dae, const Vector& x0, const Vector& u0);

/// H(s) = C (sE - A)^{-1} B via one LU factorization and m solves.
/// Throws NumericalError (carrying s) when the shifted matrix is numerically
/// singular: reciprocal condition estimate below machine epsilon * 1e3.
[[nodiscard]] CMatrix eval_transfer(const LinearPart& lin, Complex s);

/// Largest singular value of H(i*omega) over a strictly increasing positive
/// frequency grid; order preserved. Errors from eval_transfer are re-thrown
/// annotated with the offending omega.
[[nodiscard]] std::vector<std::pair<double, double>> sigma_max_sweep(
    const LinearPart& lin, const std::vector<double>& freqs);

/// Rows and columns of (E, A) that never appear in the linear dynamics;
/// these carry purely nonlinear constraints. Used by make/integrator.
struct NonlinearAlgebraicStructure {
    std::vector<Eigen::Index> rows;
    std::vector<Eigen::Index> cols;
    [[nodiscard]] bool empty() const { return rows.empty() && cols.empty(); }
};

[[nodiscard]] NonlinearAlgebraicStructure find_nonlinear_algebraic(const Matrix& E,
                                                                   const Matrix& A);

}  // namespace netmor
