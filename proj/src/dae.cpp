#include "netmor/dae.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace netmor {

namespace {

bool is_zero_row(const Matrix& M, Eigen::Index i) {
    return M.row(i).cwiseAbs().maxCoeff() == 0.0;
}

bool is_zero_col(const Matrix& M, Eigen::Index j) {
    return M.col(j).cwiseAbs().maxCoeff() == 0.0;
}

void check_dims(const Matrix& E, const Matrix& A, const Matrix& B, const Matrix& C) {
    if (E.rows() != E.cols()) throw ValidationError("E must be square");
    if (A.rows() != E.rows() || A.cols() != E.cols())
        throw ValidationError("A must match E: expected " + std::to_string(E.rows()) + "x" +
                              std::to_string(E.cols()));
    if (B.rows() != E.rows()) throw ValidationError("B must have n rows");
    if (C.cols() != E.cols()) throw ValidationError("C must have n columns");
}

// Returns true when sigma*E - A is comfortably invertible.
bool probe_regular(const Matrix& E, const Matrix& A, double sigma) {
    const Matrix S = sigma * E - A;
    if (S.size() == 0) return false;
    Eigen::FullPivLU<Matrix> lu(S);
    lu.setThreshold(1e-12);
    return lu.isInvertible();
}

std::vector<bool> derive_diff_mask(const Matrix& E) {
    std::vector<bool> mask(static_cast<std::size_t>(E.rows()));
    for (Eigen::Index i = 0; i < E.rows(); ++i) mask[static_cast<std::size_t>(i)] = !is_zero_row(E, i);
    return mask;
}

}  // namespace

NonlinearAlgebraicStructure find_nonlinear_algebraic(const Matrix& E, const Matrix& A) {
    NonlinearAlgebraicStructure s;
    for (Eigen::Index i = 0; i < E.rows(); ++i)
        if (is_zero_row(E, i) && is_zero_row(A, i)) s.rows.push_back(i);
    for (Eigen::Index j = 0; j < E.cols(); ++j)
        if (is_zero_col(E, j) && is_zero_col(A, j)) s.cols.push_back(j);
    return s;
}

UnifiedDae make_dae(Matrix E, Matrix A, Matrix B, Matrix C, NonlinearTerm G) {
    check_dims(E, A, B, C);
    if (!probe_regular(E, A, 1.0) && !probe_regular(E, A, 2.7183)) {
        Eigen::Index bad = 0;
        for (Eigen::Index i = 0; i < E.rows(); ++i) {
            if (is_zero_row(E, i) && is_zero_row(A, i)) {
                bad = i;
                break;
            }
        }
        std::ostringstream msg;
        msg << "singular pencil: sigma*E - A is singular at probes sigma=1 and sigma=2.7183"
            << " (first fully zero row: " << bad << ")";
        throw ValidationError(msg.str());
    }
    UnifiedDae dae;
    dae.n = E.rows();
    dae.m = B.cols();
    dae.p = C.rows();
    dae.diff_mask = derive_diff_mask(E);
    dae.E = std::move(E);
    dae.A = std::move(A);
    dae.B = std::move(B);
    dae.C = std::move(C);
    dae.G = std::move(G);
    return dae;
}

UnifiedDae make_dae_nonlinear_algebraic(Matrix E, Matrix A, Matrix B, Matrix C, NonlinearTerm G) {
    check_dims(E, A, B, C);
    if (!G) throw ValidationError("nonlinear-algebraic construction requires a G term");
    const auto nl = find_nonlinear_algebraic(E, A);
    if (nl.rows.size() != nl.cols.size())
        throw ValidationError("nonlinear-algebraic rows (" + std::to_string(nl.rows.size()) +
                              ") and columns (" + std::to_string(nl.cols.size()) +
                              ") do not pair up");
    // Probe the pencil restricted to rows/columns the linear part acts on.
    std::vector<Eigen::Index> keep;
    {
        std::vector<bool> drop_row(static_cast<std::size_t>(E.rows()), false);
        for (auto i : nl.rows) drop_row[static_cast<std::size_t>(i)] = true;
        for (Eigen::Index i = 0; i < E.rows(); ++i)
            if (!drop_row[static_cast<std::size_t>(i)]) keep.push_back(i);
    }
    std::vector<Eigen::Index> keep_col;
    {
        std::vector<bool> drop_col(static_cast<std::size_t>(E.cols()), false);
        for (auto j : nl.cols) drop_col[static_cast<std::size_t>(j)] = true;
        for (Eigen::Index j = 0; j < E.cols(); ++j)
            if (!drop_col[static_cast<std::size_t>(j)]) keep_col.push_back(j);
    }
    if (keep.size() != keep_col.size())
        throw ValidationError("restricted pencil is not square");
    const auto nk = static_cast<Eigen::Index>(keep.size());
    Matrix Er(nk, nk), Ar(nk, nk);
    for (Eigen::Index r = 0; r < nk; ++r)
        for (Eigen::Index c = 0; c < nk; ++c) {
            Er(r, c) = E(keep[static_cast<std::size_t>(r)], keep_col[static_cast<std::size_t>(c)]);
            Ar(r, c) = A(keep[static_cast<std::size_t>(r)], keep_col[static_cast<std::size_t>(c)]);
        }
    if (nk > 0 && !probe_regular(Er, Ar, 1.0) && !probe_regular(Er, Ar, 2.7183))
        throw ValidationError("singular pencil on the linearly active subsystem");

    UnifiedDae dae;
    dae.n = E.rows();
    dae.m = B.cols();
    dae.p = C.rows();
    dae.diff_mask = derive_diff_mask(E);
    dae.E = std::move(E);
    dae.A = std::move(A);
    dae.B = std::move(B);
    dae.C = std::move(C);
    dae.G = std::move(G);
    return dae;
}

LinearPart linear_part(const UnifiedDae& dae) { return LinearPart{dae.E, dae.A, dae.B, dae.C}; }

LinearPart linearize(const UnifiedDae& dae, const Vector& x0, const Vector& u0) {
    if (x0.size() != dae.n || u0.size() != dae.m)
        throw ValidationError("linearize: operating point has wrong dimensions");
    LinearPart lin{dae.E, dae.A, dae.B, dae.C};
    if (!dae.G) return lin;
    const Vector g0 = dae.G(x0, u0);
    for (Eigen::Index j = 0; j < dae.n; ++j) {
        const double h = 1e-7 * (1.0 + std::abs(x0(j)));
        Vector xp = x0;
        xp(j) += h;
        lin.A.col(j) += (dae.G(xp, u0) - g0) / h;
    }
    for (Eigen::Index j = 0; j < dae.m; ++j) {
        const double h = 1e-7 * (1.0 + std::abs(u0(j)));
        Vector up = u0;
        up(j) += h;
        lin.B.col(j) += (dae.G(x0, up) - g0) / h;
    }
    return lin;
}

CMatrix eval_transfer(const LinearPart& lin, Complex s) {
    const CMatrix S = s * lin.E.cast<Complex>() - lin.A.cast<Complex>();
    Eigen::PartialPivLU<CMatrix> lu(S);
    const double rcond = lu.rcond();
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (!(rcond > eps * 1e3)) {
        std::ostringstream msg;
        msg << "shifted matrix numerically singular at s = (" << s.real() << ", " << s.imag()
            << "i), rcond = " << rcond;
        throw NumericalError(msg.str());
    }
    const CMatrix X = lu.solve(lin.B.cast<Complex>());
    return lin.C.cast<Complex>() * X;
}

std::vector<std::pair<double, double>> sigma_max_sweep(const LinearPart& lin,
                                                       const std::vector<double>& freqs) {
    if (freqs.empty()) throw ValidationError("empty frequency grid");
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        if (freqs[k] <= 0.0) throw ValidationError("frequencies must be positive");
        if (k > 0 && freqs[k] <= freqs[k - 1])
            throw ValidationError("frequency grid must be strictly increasing");
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(freqs.size());
    for (double w : freqs) {
        try {
            const CMatrix H = eval_transfer(lin, Complex(0.0, w));
            Eigen::JacobiSVD<CMatrix> svd(H);
            out.emplace_back(w, svd.singularValues()(0));
        } catch (const NumericalError& e) {
            throw NumericalError("sigma_max_sweep at omega = " + std::to_string(w) + ": " +
                                 e.what());
        }
    }
    return out;
}

}  // namespace netmor
