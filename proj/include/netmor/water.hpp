#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "netmor/net_model.hpp"
#include "netmor/types.hpp"

namespace netmor::water {

/// Rigid-water-column pipe. Pressures in Pa, flows in kg/s.
struct WaterPipeSpec {
    double length = 0.0;     ///< L (m)
    double area = 0.0;       ///< A (m^2)
    double diameter = 0.0;   ///< D (m)
    double friction = 0.02;  ///< Darcy-Weisbach lambda
    double elevation = 0.0;  ///< elevation angle alpha (rad)
    double density = 1000.0; ///< rho (kg/m^3)
};

enum class NodeKind { Pressure, Demand };

struct WaterNode {
    std::string name;
    NodeKind kind = NodeKind::Demand;
    double boundary = 0.0;  ///< prescribed pressure (Pa) or demand flow (kg/s)
};

struct WaterEdge {
    std::string name;
    std::string from;
    std::string to;
    WaterPipeSpec spec;
};

struct WaterNetwork {
    std::vector<WaterNode> nodes;
    std::vector<WaterEdge> edges;
};

/// Signed incidence matrix (nodes x edges; +1 where the edge arrives, -1
/// where it leaves) plus its per-tag blocks transposed to edge-major form:
/// A_G^p is edges x pressure-nodes, A_G^q is edges x demand-nodes.
struct Incidence {
    Matrix full;   ///< nodes x edges
    Matrix Agp;    ///< edges x pressure nodes
    Matrix Agq;    ///< edges x demand nodes
    std::vector<Eigen::Index> pressure_nodes;
    std::vector<Eigen::Index> demand_nodes;
};

Incidence build_incidence(const WaterNetwork& network);

/// Friction column g(q): entry i = (L_i/rho) * lambda/(2 D A_i^2) * q_i|q_i|.
[[nodiscard]] Vector water_friction(const Vector& q, const std::vector<WaterPipeSpec>& specs);

/// Lowers the network to the unified form with state (edge flows, demand
/// node pressures), inputs (pressure-node pressures, demand-node flows), and
/// algebraic rows enforcing the node balances.
AssembledNetwork assemble_water(const WaterNetwork& network);

constexpr double kGravity = 9.81;

}  // namespace netmor::water
