#pragma once

#include <vector>

#include "netmor/dae.hpp"
#include "netmor/types.hpp"

namespace netmor::tirka {

struct TirkaConfig {
    Eigen::Index r = 1;
    CVector shifts;           ///< initial shifts, closed under conjugation; empty = preset
    CMatrix right_tangents;   ///< m x r, conjugate-consistent with the shifts; empty = preset
    CMatrix left_tangents;    ///< p x r
    double tol = 1e-6;
    int max_iter = 100;
};

/// Real interpolation bases built from the shifted solves
///   v_i = (s_i E - A)^{-1} B b_i,   w_i = (s_i E - A)^{-T} C^T c_i,
/// with conjugate pairs replaced by real/imaginary parts and the columns
/// orthonormalized. TB and TC are the tangent stacks expressed in the
/// orthonormal coordinates, i.e. the products F^T V and W^T Fbar that the
/// feed-through correction consumes; they reproduce the complex tangents
/// exactly at the shifts.
struct KrylovBases {
    Matrix V;        ///< n x r, orthonormal
    Matrix W;        ///< n x r, orthonormal
    Matrix TB;       ///< m x r effective right-tangent stack (= F^T V)
    Matrix TC;       ///< r x p effective left-tangent stack (= W^T Fbar)
    Matrix Vraw;     ///< realified columns before orthonormalization
    Matrix Wraw;
};

KrylovBases build_krylov_bases(const LinearPart& lin, const CVector& shifts,
                               const CMatrix& right_tangents, const CMatrix& left_tangents);

struct TirkaIteration {
    KrylovBases bases;          ///< built at the reported shifts
    CVector shifts;             ///< shifts the bases interpolate
    CMatrix right_tangents;     ///< m x r
    CMatrix left_tangents;      ///< p x r
    std::vector<double> history;  ///< per-iteration relative shift change
    bool converged = false;
    int iterations = 0;
};

/// Shift iteration: rebuild bases, mirror the reduced generalized
/// eigenvalues into new shifts, update tangents from the reduced
/// eigenvectors, stop when the sorted shifts move less than tol relative.
/// Non-convergence within max_iter is reported via the flag, not an error.
TirkaIteration tirka_iterate(const LinearPart& lin, const TirkaConfig& cfg);

/// Constant polynomial part of the transfer function. For an index-1
/// semi-explicit system this is -C2 A22^{-1} B2 (subscript 2 = algebraic
/// rows/columns), cross-checked against the numeric limit H(i*1e8). When
/// A22 is singular the numeric limit decides: a vanishing limit yields
/// D = 0; a growing one means the polynomial part is not constant.
Matrix estimate_polynomial_part(const LinearPart& lin, const std::vector<bool>& diff_mask);

struct CorrectionPair {
    Matrix F;     ///< n x m, solves F^T V = TB
    Matrix Fbar;  ///< n x p, solves W^T Fbar = TC
};

CorrectionPair solve_correction_pair(const Matrix& V, const Matrix& W, const Matrix& TB,
                                     const Matrix& TC);

struct ReducedModel {
    Eigen::Index r = 0;
    Matrix Er;       ///< W^T E V
    Matrix Ar;       ///< uncorrected W^T A V
    Matrix Ahat;     ///< Ar + TC * Dr * TB
    Matrix Bhat;     ///< W^T B - TC * Dr
    Matrix Chat;     ///< C V - Dr * TB
    Matrix Dr;       ///< retained feed-through (p x m)
    Matrix V, W;
    CorrectionPair correction;
    CVector shifts;
    CMatrix right_tangents;
    CMatrix left_tangents;
    std::vector<double> history;
    bool converged = false;
    NonlinearTerm Gr;  ///< W^T G(V x_r, u)

    /// Reduced transfer function Chat (s Er - Ahat)^{-1} Bhat + Dr.
    [[nodiscard]] CMatrix eval_transfer(Complex s) const;
};

/// Forms the corrected reduced model from converged bases, the feed-through
/// estimate, and the full nonlinear term (projected by Petrov-Galerkin).
ReducedModel assemble_reduced(const LinearPart& lin, const KrylovBases& bases, const Matrix& Dr,
                              const CVector& shifts, const CMatrix& right_tangents,
                              const CMatrix& left_tangents, const NonlinearTerm& G);

struct InterpolationResidual {
    Complex shift;
    double right;
    double left;
    double bitangential;
};

/// Relative residuals of the three tangential interpolation conditions at
/// every stored shift.
std::vector<InterpolationResidual> verify_interpolation(const LinearPart& lin,
                                                        const ReducedModel& rom);

/// Default preset: r log-spaced real shifts in [1e-3, 1e3] with leading
/// singular-vector tangents of H(sigma_i).
TirkaConfig default_config(const LinearPart& lin, Eigen::Index r);

/// Convenience driver: iterate, estimate the polynomial part, assemble.
ReducedModel reduce(const UnifiedDae& dae, const TirkaConfig& cfg);

}  // namespace netmor::tirka
