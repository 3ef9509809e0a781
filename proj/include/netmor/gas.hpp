#pragma once

#include <string>
#include <vector>

#include "netmor/dae.hpp"
#include "netmor/net_model.hpp"
#include "netmor/types.hpp"

namespace netmor::gas {

enum class Scheme { FVM, FDM };

/// Physical description of one pipe. Pressures are handled in bar at the
/// network boundary and in Pa inside the assembled state.
struct GasPipelineSpec {
    double length = 0.0;         ///< L (m)
    double diameter = 0.0;       ///< d (m)
    double area = 0.0;           ///< a (m^2); 0 means "derive from diameter"
    double friction = 0.011;     ///< lambda, constant per pipe
    double sound_speed_sq = 1.4e5;  ///< c = gamma_0 (m^2/s^2)
    double mesh = 0.0;           ///< cell size Delta (m)
};

/// Discretized single pipe. State unknowns are the pressures p_2..p_n and
/// flows q_1..q_{n-1}; p_1 = p_s and q_n = q_d are the boundary data. The
/// FDM variant stores the row-rescaled matrices (identity mass) together
/// with the row scale that must also be applied to the friction term.
struct PipelineModel {
    Scheme scheme = Scheme::FVM;
    Eigen::Index n = 0;  ///< grid-point count; state dimension is 2n-2
    Vector h;            ///< cell widths h_1..h_{n-1}
    Vector area;         ///< per-cell areas a_1..a_{n-1}
    Vector lambda;       ///< per-cell friction factors
    Vector diam;         ///< per-cell diameters
    double c = 0.0;      ///< sound-speed constant
    Matrix Mp, Mq;       ///< mass matrices, (n-1) x (n-1)
    Matrix Kpq, Kqp;     ///< coupling matrices
    Vector Bp, Bq;       ///< boundary vectors
    Vector qrow_scale;   ///< scale applied to friction rows (ones for FVM)

    [[nodiscard]] Eigen::Index cells() const { return n - 1; }
    [[nodiscard]] Eigen::Index state_dim() const { return 2 * (n - 1); }
};

enum class NodeKind { Supply, Demand, Junction };

struct GasNode {
    std::string name;
    NodeKind kind = NodeKind::Junction;
    double boundary = 0.0;  ///< supply pressure (bar) or demand flow (kg/s)
};

struct GasEdge {
    std::string name;
    std::string from;
    std::string to;
    GasPipelineSpec spec;
};

/// Directed pipe graph. Every interior node of degree 2 must already be
/// contracted away; junctions carry at least three pipes.
struct GasTopology {
    std::vector<GasNode> nodes;
    std::vector<GasEdge> edges;
};

/// Finite-volume discretization of one pipe following the banded mass,
/// coupling and boundary stencils of the isothermal Euler model.
PipelineModel discretize_pipeline_fvm(const GasPipelineSpec& spec);

/// Finite-difference variant: the two weighted mass rows are lumped to their
/// row sums and every row is divided by its mass diagonal, so E becomes the
/// identity while the steady state is untouched.
PipelineModel discretize_pipeline_fdm(const GasPipelineSpec& spec);

/// Frictional loss vector g(p_s, p, q); entry i uses the pressure p_i except
/// the first, which uses the supply pressure. All pressures must be positive.
[[nodiscard]] Vector friction_vector(const PipelineModel& model, double p_s, const Vector& p,
                                     const Vector& q);

/// Assembles the multi-pipe network into the unified descriptor form.
/// Junctions contribute one flow unknown per incoming pipe plus algebraic
/// rows for flow balance and pressure equality. Inputs are (supply pressures
/// in bar, demand flows in kg/s); outputs are (demand-node pressures in bar,
/// supply-node flows in kg/s).
AssembledNetwork assemble_gas_network(const GasTopology& topology, Scheme scheme);

}  // namespace netmor::gas
