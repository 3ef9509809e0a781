#pragma once

#include <string>
#include <vector>

#include "netmor/net_model.hpp"
#include "netmor/types.hpp"

namespace netmor::power {

/// Distributed transmission-line parameters, per unit length.
struct LineSpec {
    double resistance = 0.0;   ///< R (Ohm/m)
    double inductance = 0.0;   ///< L (H/m)
    double capacitance = 0.0;  ///< C (F/m)
    double conductance = 0.0;  ///< G (S/m)
    double length = 0.0;       ///< (m)
    int segments = 0;
};

/// Diagonal parameter matrices of a discretized line plus the forward
/// difference operator D_x (square, -1 diagonal / +1 superdiagonal, 1/dx).
struct DiscretizedLine {
    Vector L, C, R, G;  ///< diagonals, one entry per segment
    Matrix Dx;
    double dx = 0.0;
};

DiscretizedLine discretize_line_fdm(const LineSpec& spec);

enum class BusKind { Generator, Load };

struct Bus {
    std::string name;
    BusKind kind = BusKind::Load;
    double p_load = 0.0;
    // generator parameters (ignored for load buses)
    double e_internal = 0.0;  ///< E'
    double x_reactance = 0.0; ///< X'
    double alpha = 0.0;       ///< internal angle
    // attachment: which line end supplies |V| for the constraint
    int line = 0;
    bool at_head = true;
};

struct BusSystem {
    std::vector<Bus> buses;
    Matrix G_adm;  ///< conductance part of the admittance, symmetric
    Matrix B_adm;  ///< susceptance part, symmetric
};

/// Injected power per bus: P_i = sum_j |V_i||V_j| (G_ij cos th_ij + B_ij sin th_ij).
[[nodiscard]] Vector power_flow_residual(const BusSystem& sys, const Vector& vmag,
                                         const Vector& theta);

/// p_gen = E' V / X' * sin(alpha - theta) for one generator bus.
[[nodiscard]] double generator_power(const Bus& bus, double vmag, double theta);

/// Lowers lines plus buses to the unified form. State is (currents, voltages,
/// bus angles); the angle rows carry the nonlinear power-flow constraint and
/// appear in neither E nor A. Inputs are the per-bus load powers.
AssembledNetwork assemble_power(const std::vector<LineSpec>& lines, const BusSystem& buses);

}  // namespace netmor::power
