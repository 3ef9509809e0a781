#include "netmor/power.hpp"

#include <cmath>

namespace netmor::power {

DiscretizedLine discretize_line_fdm(const LineSpec& spec) {
    if (spec.segments < 1) throw ValidationError("line needs at least one segment");
    if (spec.inductance <= 0.0 || spec.capacitance <= 0.0)
        throw ValidationError("per-length inductance and capacitance must be positive");
    if (spec.resistance < 0.0 || spec.conductance < 0.0)
        throw ValidationError("per-length resistance and conductance must be >= 0");
    if (spec.length <= 0.0) throw ValidationError("line length must be positive");

    const auto s = static_cast<Eigen::Index>(spec.segments);
    DiscretizedLine d;
    d.dx = spec.length / static_cast<double>(spec.segments);
    d.L = Vector::Constant(s, spec.inductance * d.dx);
    d.C = Vector::Constant(s, spec.capacitance * d.dx);
    d.R = Vector::Constant(s, spec.resistance * d.dx);
    d.G = Vector::Constant(s, spec.conductance * d.dx);
    d.Dx = Matrix::Zero(s, s);
    for (Eigen::Index i = 0; i < s; ++i) {
        d.Dx(i, i) = -1.0 / d.dx;
        if (i + 1 < s) d.Dx(i, i + 1) = 1.0 / d.dx;
    }
    return d;
}

Vector power_flow_residual(const BusSystem& sys, const Vector& vmag, const Vector& theta) {
    const auto nb = static_cast<Eigen::Index>(sys.buses.size());
    if (vmag.size() != nb || theta.size() != nb)
        throw ValidationError("power_flow_residual: one |V| and theta per bus required");
    Vector P = Vector::Zero(nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
        for (Eigen::Index j = 0; j < nb; ++j) {
            const double dth = theta(i) - theta(j);
            P(i) += vmag(i) * vmag(j) *
                    (sys.G_adm(i, j) * std::cos(dth) + sys.B_adm(i, j) * std::sin(dth));
        }
    }
    return P;
}

double generator_power(const Bus& bus, double vmag, double theta) {
    if (bus.x_reactance == 0.0) throw ValidationError("generator bus needs nonzero X'");
    return bus.e_internal * vmag / bus.x_reactance * std::sin(bus.alpha - theta);
}

AssembledNetwork assemble_power(const std::vector<LineSpec>& lines, const BusSystem& sys) {
    if (lines.empty()) throw ValidationError("power network needs at least one line");
    const auto nb = static_cast<Eigen::Index>(sys.buses.size());
    if (nb > 0) {
        if (sys.G_adm.rows() != nb || sys.G_adm.cols() != nb || sys.B_adm.rows() != nb ||
            sys.B_adm.cols() != nb)
            throw ValidationError("admittance matrices must be nb x nb");
        if (!sys.G_adm.isApprox(sys.G_adm.transpose(), 1e-12) ||
            !sys.B_adm.isApprox(sys.B_adm.transpose(), 1e-12))
            throw ValidationError("admittance matrices must be symmetric");
    }

    std::vector<DiscretizedLine> disc;
    disc.reserve(lines.size());
    Eigen::Index n_seg = 0;
    std::vector<Eigen::Index> line_offset;
    for (const auto& spec : lines) {
        line_offset.push_back(n_seg);
        disc.push_back(discretize_line_fdm(spec));
        n_seg += static_cast<Eigen::Index>(spec.segments);
    }

    // State: currents (all lines), voltages (all lines), bus angles.
    const Eigen::Index n = 2 * n_seg + nb;
    const Eigen::Index i_off = 0;
    const Eigen::Index v_off = n_seg;
    const Eigen::Index th_off = 2 * n_seg;

    Matrix E = Matrix::Zero(n, n);
    Matrix A = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < disc.size(); ++k) {
        const auto& d = disc[k];
        const auto s = d.L.size();
        const auto o = line_offset[k];
        E.block(i_off + o, i_off + o, s, s) = d.L.asDiagonal();
        E.block(v_off + o, v_off + o, s, s) = d.C.asDiagonal();
        A.block(i_off + o, i_off + o, s, s) = Matrix((-d.R).asDiagonal());
        A.block(i_off + o, v_off + o, s, s) = -d.Dx;
        A.block(v_off + o, i_off + o, s, s) = d.Dx.transpose();
        A.block(v_off + o, v_off + o, s, s) = Matrix((-d.G).asDiagonal());
    }

    // Inputs: one load power per bus, injected on the angle rows.
    const Eigen::Index m = std::max<Eigen::Index>(nb, 1);
    Matrix B = Matrix::Zero(n, m);
    for (Eigen::Index b = 0; b < nb; ++b) B(th_off + b, b) = 1.0;

    // Outputs: bus attachment voltages then angles; for a bus-free line, the
    // terminal voltage of each line.
    std::vector<Eigen::Index> v_attach;
    for (const auto& bus : sys.buses) {
        if (bus.line < 0 || bus.line >= static_cast<int>(lines.size()))
            throw ValidationError("bus '" + bus.name + "' references an unknown line");
        const auto o = line_offset[static_cast<std::size_t>(bus.line)];
        const auto s = disc[static_cast<std::size_t>(bus.line)].L.size();
        v_attach.push_back(v_off + (bus.at_head ? o : o + s - 1));
    }
    const Eigen::Index p = nb > 0 ? 2 * nb : static_cast<Eigen::Index>(lines.size());
    Matrix C = Matrix::Zero(p, n);
    std::vector<std::string> output_names;
    if (nb > 0) {
        for (Eigen::Index b = 0; b < nb; ++b) {
            C(b, v_attach[static_cast<std::size_t>(b)]) = 1.0;
            output_names.push_back("v." + sys.buses[static_cast<std::size_t>(b)].name);
        }
        for (Eigen::Index b = 0; b < nb; ++b) {
            C(nb + b, th_off + b) = 1.0;
            output_names.push_back("theta." + sys.buses[static_cast<std::size_t>(b)].name);
        }
    } else {
        for (std::size_t k = 0; k < lines.size(); ++k) {
            const auto o = line_offset[k];
            const auto s = disc[k].L.size();
            C(static_cast<Eigen::Index>(k), v_off + o + s - 1) = 1.0;
            output_names.push_back("v.line" + std::to_string(k));
        }
    }

    AssembledNetwork out;
    if (nb == 0) {
        out.dae = make_dae(std::move(E), std::move(A), std::move(B), std::move(C));
        out.u0 = Vector::Zero(m);
        out.x0 = Vector::Zero(n);
        out.output_names = std::move(output_names);
        out.input_names = {"unused"};
        return out;
    }

    // Angle rows: 0 = p_i + p_gen_i(V_i, th_i) - P_i(V, th).
    BusSystem sys_copy = sys;
    std::vector<Eigen::Index> attach = v_attach;
    NonlinearTerm G = [sys_copy, attach, th_off, nb, n](const Vector& x, const Vector&) {
        Vector vmag(nb), theta(nb);
        for (Eigen::Index b = 0; b < nb; ++b) {
            vmag(b) = x(attach[static_cast<std::size_t>(b)]);
            theta(b) = x(th_off + b);
        }
        const Vector P = power_flow_residual(sys_copy, vmag, theta);
        Vector g = Vector::Zero(n);
        for (Eigen::Index b = 0; b < nb; ++b) {
            const auto& bus = sys_copy.buses[static_cast<std::size_t>(b)];
            double gen = 0.0;
            if (bus.kind == BusKind::Generator) gen = generator_power(bus, vmag(b), theta(b));
            g(th_off + b) = gen - P(b);
        }
        return g;
    };

    out.dae = make_dae_nonlinear_algebraic(std::move(E), std::move(A), std::move(B), std::move(C),
                                           std::move(G));
    out.u0 = Vector::Zero(m);
    for (Eigen::Index b = 0; b < nb; ++b) {
        out.u0(b) = sys.buses[static_cast<std::size_t>(b)].p_load;
        out.input_names.push_back("p." + sys.buses[static_cast<std::size_t>(b)].name);
    }
    out.output_names = std::move(output_names);

    // Zero currents, unit voltages, zero angles.
    out.x0 = Vector::Zero(n);
    out.x0.segment(v_off, n_seg).setOnes();

    const Vector loads = out.u0;
    out.constraint_residual = [sys_copy, attach, th_off, nb, loads](const Vector& x) {
        Vector vmag(nb), theta(nb);
        for (Eigen::Index b = 0; b < nb; ++b) {
            vmag(b) = x(attach[static_cast<std::size_t>(b)]);
            theta(b) = x(th_off + b);
        }
        const Vector P = power_flow_residual(sys_copy, vmag, theta);
        double worst = 0.0;
        for (Eigen::Index b = 0; b < nb; ++b) {
            const auto& bus = sys_copy.buses[static_cast<std::size_t>(b)];
            double gen = 0.0;
            if (bus.kind == BusKind::Generator) gen = generator_power(bus, vmag(b), theta(b));
            worst = std::max(worst, std::abs(loads(b) + gen - P(b)));
        }
        return worst;
    };
    return out;
}

}  // namespace netmor::power
