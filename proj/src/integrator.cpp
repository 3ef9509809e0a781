#include "netmor/integrator.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace netmor {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix select(const Matrix& M, const std::vector<Eigen::Index>& rows,
              const std::vector<Eigen::Index>& cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = M(rows[r], cols[c]);
    return out;
}

// Damped Newton update for constraint rows carried entirely by G. The
// Jacobian with respect to the paired unknowns is taken by forward
// differences; x is modified in place.
void solve_nonlinear_rows(const UnifiedDae& dae, Vector& x, const Vector& u,
                          const NonlinearAlgebraicStructure& nl) {
    const auto k = static_cast<Eigen::Index>(nl.rows.size());
    if (k == 0) return;
    auto residual = [&](const Vector& xv) {
        const Vector g = dae.eval_G(xv, u);
        Vector r(k);
        for (Eigen::Index i = 0; i < k; ++i)
            r(i) = dae.B.row(nl.rows[static_cast<std::size_t>(i)]).dot(u) +
                   g(nl.rows[static_cast<std::size_t>(i)]);
        return r;
    };
    constexpr int max_newton = 50;
    constexpr double damping = 0.7;
    const double tol = 1e-12 * (u.lpNorm<Eigen::Infinity>() + 1.0);
    for (int it = 0; it < max_newton; ++it) {
        Vector r = residual(x);
        if (r.lpNorm<Eigen::Infinity>() <= tol) return;
        Matrix J(k, k);
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto col = nl.cols[static_cast<std::size_t>(j)];
            const double hstep = 1e-7 * (1.0 + std::abs(x(col)));
            Vector xp = x;
            xp(col) += hstep;
            J.col(j) = (residual(xp) - r) / hstep;
        }
        Eigen::PartialPivLU<Matrix> lu(J);
        const Vector dx = lu.solve(-r);
        if (!dx.allFinite()) throw NumericalError("nonlinear constraint update diverged");
        for (Eigen::Index j = 0; j < k; ++j)
            x(nl.cols[static_cast<std::size_t>(j)]) += damping * dx(j);
    }
}

}  // namespace

StepMatrix prepare_step(const UnifiedDae& dae, double tau) {
    if (tau <= 0.0) throw ValidationError("step size must be positive");
    StepMatrix sm;
    sm.tau = tau;
    sm.nl = find_nonlinear_algebraic(dae.E, dae.A);
    if (sm.nl.rows.size() != sm.nl.cols.size())
        throw ValidationError("nonlinear constraint rows and columns do not pair up");
    if (sm.nl.empty()) {
        const Matrix M = dae.E - tau * dae.A;
        sm.lu.compute(M);
        if (!(sm.lu.rcond() > 1e-14)) {
            std::ostringstream msg;
            msg << "step matrix E - tau*A singular at tau = " << tau;
            throw NumericalError(msg.str());
        }
        return sm;
    }
    std::vector<bool> drop_row(static_cast<std::size_t>(dae.n), false);
    std::vector<bool> drop_col(static_cast<std::size_t>(dae.n), false);
    for (auto i : sm.nl.rows) drop_row[static_cast<std::size_t>(i)] = true;
    for (auto j : sm.nl.cols) drop_col[static_cast<std::size_t>(j)] = true;
    for (Eigen::Index i = 0; i < dae.n; ++i) {
        if (!drop_row[static_cast<std::size_t>(i)]) sm.lin_rows.push_back(i);
        if (!drop_col[static_cast<std::size_t>(i)]) sm.lin_cols.push_back(i);
    }
    const Matrix M = select(dae.E, sm.lin_rows, sm.lin_cols) -
                     tau * select(dae.A, sm.lin_rows, sm.lin_cols);
    sm.lu.compute(M);
    if (!(sm.lu.rcond() > 1e-14)) {
        std::ostringstream msg;
        msg << "step matrix E - tau*A singular at tau = " << tau;
        throw NumericalError(msg.str());
    }
    return sm;
}

Vector step(const UnifiedDae& dae, const Vector& x_prev, const Vector& u, double tau,
            const StepMatrix& cached) {
    if (cached.tau != tau) throw ValidationError("cached factorization built for a different tau");
    const Vector rhs_full = dae.E * x_prev + tau * (dae.B * u) + tau * dae.eval_G(x_prev, u);
    Vector x_next;
    if (cached.nl.empty()) {
        x_next = cached.lu.solve(rhs_full);
    } else {
        Vector rhs(static_cast<Eigen::Index>(cached.lin_rows.size()));
        for (std::size_t r = 0; r < cached.lin_rows.size(); ++r)
            rhs(static_cast<Eigen::Index>(r)) = rhs_full(cached.lin_rows[r]);
        const Vector xl = cached.lu.solve(rhs);
        x_next = x_prev;
        for (std::size_t c = 0; c < cached.lin_cols.size(); ++c)
            x_next(cached.lin_cols[c]) = xl(static_cast<Eigen::Index>(c));
        solve_nonlinear_rows(dae, x_next, u, cached.nl);
    }
    if (!x_next.allFinite()) throw NumericalError("non-finite state component after step");
    return x_next;
}

namespace {

SimulationResult run(const UnifiedDae& dae, const Vector& x0, const InputSignal& input,
                     const StepperConfig& cfg) {
    if (x0.size() != dae.n) throw ValidationError("initial state has wrong dimension");
    if (cfg.max_iter < 1) throw ValidationError("max_iter must be at least 1");
    if (cfg.settle_tol <= 0.0) throw ValidationError("settle_tol must be positive");
    if (cfg.record_every < 1) throw ValidationError("record_every must be at least 1");

    SimulationResult res;
    const auto t_fact = Clock::now();
    const StepMatrix sm = prepare_step(dae, cfg.tau);
    res.factorization_seconds = seconds_since(t_fact);

    Vector x = x0;
    res.time.push_back(0.0);
    res.states.push_back(x);
    res.outputs.push_back(dae.C * x);

    int consecutive = 0;
    const auto t_loop = Clock::now();
    int k = 0;
    for (; k < cfg.max_iter; ++k) {
        const double t_next = (k + 1) * cfg.tau;
        Vector u = input(k * cfg.tau);
        Vector x_next;
        try {
            x_next = step(dae, x, u, cfg.tau, sm);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (step " + std::to_string(k + 1) + ")");
        }
        const double denom = x_next.lpNorm<Eigen::Infinity>() + 1e-300;
        const double rel_change = (x_next - x).lpNorm<Eigen::Infinity>() / denom;
        x = std::move(x_next);
        if ((k + 1) % cfg.record_every == 0) {
            res.time.push_back(t_next);
            res.states.push_back(x);
            res.outputs.push_back(dae.C * x);
        }
        if (cfg.detect_settle) {
            consecutive = rel_change < cfg.settle_tol ? consecutive + 1 : 0;
            if (consecutive >= 10) {
                res.settled = true;
                res.settle_step = k + 1;
                ++k;
                break;
            }
        }
    }
    res.stepping_seconds = seconds_since(t_loop);
    res.steps_taken = k;
    res.final_state = x;
    return res;
}

}  // namespace

SimulationResult simulate(const UnifiedDae& dae, const Vector& x0, const Vector& u,
                          const StepperConfig& cfg) {
    if (u.size() != dae.m) throw ValidationError("input vector has wrong dimension");
    return run(dae, x0, [&u](double) { return u; }, cfg);
}

SimulationResult simulate(const UnifiedDae& dae, const Vector& x0, const InputSignal& u,
                          const StepperConfig& cfg) {
    return run(dae, x0, u, cfg);
}

double steady_state_residual(const UnifiedDae& dae, const Vector& x, const Vector& u) {
    if (x.size() != dae.n || u.size() != dae.m)
        throw ValidationError("steady_state_residual: dimension mismatch");
    const Vector bu = dae.B * u;
    const Vector r = dae.A * x + bu + dae.eval_G(x, u);
    return r.lpNorm<Eigen::Infinity>() / (bu.lpNorm<Eigen::Infinity>() + 1.0);
}

}  // namespace netmor
