#pragma once

#include <Eigen/LU>
#include <memory>
#include <vector>

#include "netmor/dae.hpp"
#include "netmor/types.hpp"

namespace netmor {

struct StepperConfig {
    double tau = 0.5;          ///< step size (s)
    int max_iter = 1000;       ///< step-count bound
    double settle_tol = 1e-8;  ///< relative per-step change marking steady state
    int record_every = 1;      ///< output decimation
    bool detect_settle = true; ///< stop after 10 consecutive sub-tolerance steps
};

/// Cached factorization of (E - tau*A) for repeated stepping. When the
/// system carries purely nonlinear constraint rows (both E and A rows zero),
/// the factorization covers the linearly active subsystem and the remaining
/// unknowns are updated by a damped Newton iteration on those rows.
struct StepMatrix {
    double tau = 0.0;
    Eigen::PartialPivLU<Matrix> lu;
    NonlinearAlgebraicStructure nl;
    std::vector<Eigen::Index> lin_rows;
    std::vector<Eigen::Index> lin_cols;
};

/// Factorizes E - tau*A. Throws NumericalError naming tau when singular.
StepMatrix prepare_step(const UnifiedDae& dae, double tau);

/// One semi-implicit Euler step:
///   x_next = (E - tau*A)^{-1} (E x_prev + tau*B u + tau*G(x_prev, u)).
/// The nonlinear term is evaluated at the previous state; no inner solve.
Vector step(const UnifiedDae& dae, const Vector& x_prev, const Vector& u, double tau,
            const StepMatrix& cached);

struct SimulationResult {
    std::vector<double> time;          ///< recorded grid, spacing tau*record_every
    std::vector<Vector> states;        ///< recorded snapshots
    std::vector<Vector> outputs;       ///< y = C x at the recorded steps
    double factorization_seconds = 0.0;
    double stepping_seconds = 0.0;
    bool settled = false;
    int settle_step = -1;
    int steps_taken = 0;
    Vector final_state;
};

using InputSignal = std::function<Vector(double)>;

/// Advances from x0 until max_iter steps or until the relative state change
/// stays below settle_tol for 10 consecutive steps.
SimulationResult simulate(const UnifiedDae& dae, const Vector& x0, const Vector& u,
                          const StepperConfig& cfg);

/// Time-varying input overload.
SimulationResult simulate(const UnifiedDae& dae, const Vector& x0, const InputSignal& u,
                          const StepperConfig& cfg);

/// || A x + B u + G(x, u) ||_inf normalized by (||B u||_inf + 1).
[[nodiscard]] double steady_state_residual(const UnifiedDae& dae, const Vector& x,
                                           const Vector& u);

}  // namespace netmor
