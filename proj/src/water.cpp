#include "netmor/water.hpp"

#include <cmath>
#include <map>
#include <set>

namespace netmor::water {

namespace {

void validate_spec(const WaterPipeSpec& s, const std::string& name) {
    if (s.length <= 0.0 || s.area <= 0.0 || s.diameter <= 0.0 || s.density <= 0.0)
        throw ValidationError("pipe '" + name + "': length, area, diameter, density must be positive");
    if (s.friction < 0.0) throw ValidationError("pipe '" + name + "': friction must be >= 0");
    if (std::abs(s.elevation) > M_PI / 2.0)
        throw ValidationError("pipe '" + name + "': elevation angle outside [-pi/2, pi/2]");
}

}  // namespace

Incidence build_incidence(const WaterNetwork& net) {
    if (net.nodes.empty() || net.edges.empty())
        throw ValidationError("water network needs at least one node and one edge");
    std::map<std::string, Eigen::Index> node_index;
    for (std::size_t k = 0; k < net.nodes.size(); ++k)
        if (!node_index.emplace(net.nodes[k].name, static_cast<Eigen::Index>(k)).second)
            throw ValidationError("duplicate node name '" + net.nodes[k].name + "'");

    const auto n_nodes = static_cast<Eigen::Index>(net.nodes.size());
    const auto n_edges = static_cast<Eigen::Index>(net.edges.size());
    Incidence inc;
    inc.full = Matrix::Zero(n_nodes, n_edges);
    for (Eigen::Index e = 0; e < n_edges; ++e) {
        const auto& edge = net.edges[static_cast<std::size_t>(e)];
        const auto fit = node_index.find(edge.from);
        const auto tit = node_index.find(edge.to);
        if (fit == node_index.end() || tit == node_index.end())
            throw ValidationError("edge '" + edge.name + "' references an undeclared node");
        if (edge.from == edge.to) throw ValidationError("edge '" + edge.name + "' is a self-loop");
        inc.full(fit->second, e) = -1.0;  // edge leaves
        inc.full(tit->second, e) = 1.0;   // edge arrives
    }
    for (Eigen::Index k = 0; k < n_nodes; ++k) {
        if (inc.full.row(k).cwiseAbs().maxCoeff() == 0.0)
            throw ValidationError("node '" + net.nodes[static_cast<std::size_t>(k)].name +
                                  "' is isolated");
        if (net.nodes[static_cast<std::size_t>(k)].kind == NodeKind::Pressure)
            inc.pressure_nodes.push_back(k);
        else
            inc.demand_nodes.push_back(k);
    }
    inc.Agp = Matrix(n_edges, static_cast<Eigen::Index>(inc.pressure_nodes.size()));
    for (std::size_t c = 0; c < inc.pressure_nodes.size(); ++c)
        inc.Agp.col(static_cast<Eigen::Index>(c)) = inc.full.row(inc.pressure_nodes[c]).transpose();
    inc.Agq = Matrix(n_edges, static_cast<Eigen::Index>(inc.demand_nodes.size()));
    for (std::size_t c = 0; c < inc.demand_nodes.size(); ++c)
        inc.Agq.col(static_cast<Eigen::Index>(c)) = inc.full.row(inc.demand_nodes[c]).transpose();
    return inc;
}

Vector water_friction(const Vector& q, const std::vector<WaterPipeSpec>& specs) {
    if (q.size() != static_cast<Eigen::Index>(specs.size()))
        throw ValidationError("water_friction: one spec per edge flow required");
    Vector g(q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        const auto& s = specs[static_cast<std::size_t>(i)];
        g(i) = (s.length / s.density) * s.friction / (2.0 * s.diameter * s.area * s.area) * q(i) *
               std::abs(q(i));
    }
    return g;
}

AssembledNetwork assemble_water(const WaterNetwork& net) {
    {
        std::set<std::string> edge_names;
        for (const auto& e : net.edges) {
            validate_spec(e.spec, e.name);
            if (!edge_names.insert(e.name).second)
                throw ValidationError("duplicate edge name '" + e.name + "'");
        }
    }
    const Incidence inc = build_incidence(net);
    if (inc.pressure_nodes.empty())
        throw ValidationError("water network needs at least one pressure node");

    const auto ne = static_cast<Eigen::Index>(net.edges.size());
    const auto nd = static_cast<Eigen::Index>(inc.demand_nodes.size());
    const auto np = static_cast<Eigen::Index>(inc.pressure_nodes.size());
    const Eigen::Index n = ne + nd;
    const Eigen::Index m = np + nd;

    std::vector<WaterPipeSpec> specs;
    specs.reserve(net.edges.size());
    for (const auto& e : net.edges) specs.push_back(e.spec);

    // S = diag(L_i / A_i); constant head folded into G together with -g(q).
    Vector S(ne), head(ne);
    for (Eigen::Index i = 0; i < ne; ++i) {
        const auto& s = specs[static_cast<std::size_t>(i)];
        S(i) = s.length / s.area;
        head(i) = -s.length * s.density * kGravity * std::sin(s.elevation);
    }

    Matrix E = Matrix::Zero(n, n);
    E.topLeftCorner(ne, ne) = S.asDiagonal();

    Matrix A = Matrix::Zero(n, n);
    A.topRightCorner(ne, nd) = -inc.Agq;
    A.bottomLeftCorner(nd, ne) = inc.Agq.transpose();

    Matrix B = Matrix::Zero(n, m);
    B.topLeftCorner(ne, np) = -inc.Agp;
    B.bottomRightCorner(nd, nd) = -Matrix::Identity(nd, nd);

    // Outputs: demand-node pressures, then all edge flows.
    Matrix C = Matrix::Zero(nd + ne, n);
    C.topRightCorner(nd, nd) = Matrix::Identity(nd, nd);
    C.bottomLeftCorner(ne, ne) = Matrix::Identity(ne, ne);

    NonlinearTerm G = [specs, head, ne, n](const Vector& x, const Vector&) {
        Vector g = Vector::Zero(n);
        g.head(ne) = head - water_friction(x.head(ne), specs);
        return g;
    };

    AssembledNetwork out;
    out.dae = make_dae(std::move(E), std::move(A), std::move(B), std::move(C), std::move(G));

    out.u0 = Vector::Zero(m);
    double mean_ps = 0.0;
    for (std::size_t k = 0; k < inc.pressure_nodes.size(); ++k) {
        const auto& node = net.nodes[static_cast<std::size_t>(inc.pressure_nodes[k])];
        out.u0(static_cast<Eigen::Index>(k)) = node.boundary;
        mean_ps += node.boundary;
        out.input_names.push_back("p_s." + node.name + ".pa");
    }
    mean_ps /= static_cast<double>(inc.pressure_nodes.size());
    for (std::size_t k = 0; k < inc.demand_nodes.size(); ++k) {
        const auto& node = net.nodes[static_cast<std::size_t>(inc.demand_nodes[k])];
        out.u0(np + static_cast<Eigen::Index>(k)) = node.boundary;
        out.input_names.push_back("q_s." + node.name + ".kgps");
    }

    for (std::size_t k = 0; k < inc.demand_nodes.size(); ++k)
        out.output_names.push_back(
            "p." + net.nodes[static_cast<std::size_t>(inc.demand_nodes[k])].name + ".pa");
    for (const auto& e : net.edges) out.output_names.push_back("q." + e.name + ".kgps");

    // q = 0, demand pressures at the mean supply pressure.
    out.x0 = Vector::Zero(n);
    out.x0.tail(nd).setConstant(mean_ps);

    const Matrix Agq_t = inc.Agq.transpose();
    const Vector demands = out.u0.tail(nd);
    out.constraint_residual = [Agq_t, demands, ne](const Vector& x) {
        return (Agq_t * x.head(ne) - demands).lpNorm<Eigen::Infinity>();
    };
    return out;
}

}  // namespace netmor::water
