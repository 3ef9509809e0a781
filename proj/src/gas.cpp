#include "netmor/gas.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

namespace netmor::gas {

namespace {

constexpr double kBarToPa = 1e5;

struct CellData {
    Eigen::Index n = 0;
    Vector h, a, lam, d;
};

CellData validate_and_mesh(const GasPipelineSpec& spec) {
    if (spec.length <= 0.0) throw ValidationError("pipe length must be positive");
    if (spec.diameter <= 0.0) throw ValidationError("pipe diameter must be positive");
    if (spec.friction <= 0.0) throw ValidationError("friction factor must be positive");
    if (spec.sound_speed_sq <= 0.0) throw ValidationError("sound-speed constant must be positive");
    if (spec.mesh <= 0.0) throw ValidationError("mesh size must be positive");
    if (spec.mesh > spec.length) throw ValidationError("mesh size exceeds pipe length");

    double area = spec.area;
    const double disc_area = M_PI * spec.diameter * spec.diameter / 4.0;
    if (area <= 0.0) {
        area = disc_area;
    } else if (std::abs(area - disc_area) > 0.01 * disc_area) {
        std::ostringstream msg;
        msg << "area " << area << " inconsistent with diameter (pi d^2/4 = " << disc_area << ")";
        throw ValidationError(msg.str());
    }

    const double ratio = spec.length / spec.mesh;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
        throw ValidationError("pipe length is not an integral multiple of the mesh size");
    const auto n = static_cast<Eigen::Index>(rounded);
    if (n - 1 < 2) throw ValidationError("mesh too coarse for FVM stencil");

    CellData cd;
    cd.n = n;
    cd.h = Vector::Constant(n - 1, spec.mesh);
    cd.a = Vector::Constant(n - 1, area);
    cd.lam = Vector::Constant(n - 1, spec.friction);
    cd.d = Vector::Constant(n - 1, spec.diameter);
    return cd;
}

// h_ij = (h_i + h_j)/2 for adjacent cells.
double hpair(const Vector& h, Eigen::Index i) { return 0.5 * (h(i) + h(i + 1)); }

}  // namespace

PipelineModel discretize_pipeline_fvm(const GasPipelineSpec& spec) {
    const CellData cd = validate_and_mesh(spec);
    const Eigen::Index N = cd.n - 1;
    const double c = spec.sound_speed_sq;

    PipelineModel mdl;
    mdl.scheme = Scheme::FVM;
    mdl.n = cd.n;
    mdl.h = cd.h;
    mdl.area = cd.a;
    mdl.lambda = cd.lam;
    mdl.diam = cd.d;
    mdl.c = c;

    // Mass matrices: diagonal except the boundary-adjacent weighted rows.
    mdl.Mp = Matrix::Zero(N, N);
    for (Eigen::Index j = 0; j + 1 < N; ++j) mdl.Mp(j, j) = hpair(cd.h, j);
    mdl.Mp(N - 1, N - 2) = cd.h(N - 1) / 8.0;
    mdl.Mp(N - 1, N - 1) = 3.0 * cd.h(N - 1) / 8.0;

    mdl.Mq = Matrix::Zero(N, N);
    mdl.Mq(0, 0) = 3.0 * cd.h(0) / 8.0;
    mdl.Mq(0, 1) = cd.h(0) / 8.0;
    for (Eigen::Index j = 1; j < N; ++j) mdl.Mq(j, j) = hpair(cd.h, j - 1);

    // Coupling matrices; states are p_2..p_n and q_1..q_{n-1}.
    mdl.Kpq = Matrix::Zero(N, N);
    for (Eigen::Index r = 0; r < N; ++r) {
        mdl.Kpq(r, r) = (c / 2.0) / cd.a(r);
        if (r + 1 < N) mdl.Kpq(r, r + 1) = -(c / 2.0) * (1.0 / cd.a(r) - 1.0 / cd.a(r + 1));
        if (r + 2 < N) mdl.Kpq(r, r + 2) = -(c / 2.0) / cd.a(r + 1);
    }

    mdl.Kqp = Matrix::Zero(N, N);
    mdl.Kqp(0, 0) = -cd.a(0) / 2.0;
    for (Eigen::Index r = 1; r < N; ++r) {
        if (r >= 2) mdl.Kqp(r, r - 2) = cd.a(r - 1) / 2.0;
        mdl.Kqp(r, r - 1) = -(cd.a(r - 1) - cd.a(r)) / 2.0;
        mdl.Kqp(r, r) = -cd.a(r) / 2.0;
    }

    mdl.Bp = Vector::Zero(N);
    mdl.Bp(0) = cd.a(0) / 2.0;
    mdl.Bp(1) = cd.a(0) / 2.0;

    mdl.Bq = Vector::Zero(N);
    mdl.Bq(N - 2) = -(c / 2.0) / cd.a(N - 1);
    mdl.Bq(N - 1) = -(c / 2.0) / cd.a(N - 1);

    mdl.qrow_scale = Vector::Ones(N);
    return mdl;
}

PipelineModel discretize_pipeline_fdm(const GasPipelineSpec& spec) {
    PipelineModel mdl = discretize_pipeline_fvm(spec);
    const Eigen::Index N = mdl.cells();

    // Lump the two weighted mass rows to their row sums, then divide every
    // row by its mass diagonal. Row scaling leaves the steady state intact.
    Vector mp_diag(N), mq_diag(N);
    for (Eigen::Index j = 0; j + 1 < N; ++j) mp_diag(j) = mdl.Mp(j, j);
    mp_diag(N - 1) = mdl.Mp(N - 1, N - 2) + mdl.Mp(N - 1, N - 1);
    mq_diag(0) = mdl.Mq(0, 0) + mdl.Mq(0, 1);
    for (Eigen::Index j = 1; j < N; ++j) mq_diag(j) = mdl.Mq(j, j);

    mdl.Kpq.array().colwise() /= mp_diag.array();
    mdl.Bq.array() /= mp_diag.array();
    mdl.Kqp.array().colwise() /= mq_diag.array();
    mdl.Bp.array() /= mq_diag.array();
    mdl.qrow_scale = mq_diag.cwiseInverse();

    mdl.Mp = Matrix::Identity(N, N);
    mdl.Mq = Matrix::Identity(N, N);
    mdl.scheme = Scheme::FDM;
    return mdl;
}

Vector friction_vector(const PipelineModel& mdl, double p_s, const Vector& p, const Vector& q) {
    const Eigen::Index N = mdl.cells();
    if (p.size() != N || q.size() != N)
        throw ValidationError("friction_vector: state vectors must have n-1 entries");
    if (p_s <= 0.0) throw NumericalError("nonphysical pressure at supply boundary");
    for (Eigen::Index i = 0; i < N; ++i)
        if (p(i) <= 0.0)
            throw NumericalError("nonphysical pressure at state index " + std::to_string(i));

    const auto& h = mdl.h;
    const auto& a = mdl.area;
    const auto& lam = mdl.lambda;
    const auto& d = mdl.diam;
    const double c4 = mdl.c / 4.0;

    Vector g(N);
    g(0) = -c4 * (h(0) * lam(0) / (a(0) * d(0))) * q(0) * std::abs(q(0)) / p_s;
    for (Eigen::Index r = 1; r < N; ++r) {
        const double coef = h(r - 1) * lam(r - 1) / (a(r - 1) * d(r - 1)) +
                            h(r) * lam(r) / (a(r) * d(r));
        // momentum row r belongs to q_{r+1}; its pressure is state p(r-1)
        g(r) = -c4 * coef * q(r) * std::abs(q(r)) / p(r - 1);
    }
    return g;
}

namespace {

struct Layout {
    std::vector<Eigen::Index> pipe_offset;            // start of [p; q] block per edge
    std::vector<std::vector<Eigen::Index>> jvar;      // per junction, per incoming edge
    std::vector<Eigen::Index> jrow_start;             // first algebraic row per junction
    Eigen::Index total = 0;
};

struct NodeInfo {
    std::vector<Eigen::Index> in_edges;
    std::vector<Eigen::Index> out_edges;
};

void validate_topology(const GasTopology& topo, const std::vector<NodeInfo>& info,
                       const std::map<std::string, Eigen::Index>& node_index) {
    if (topo.nodes.empty() || topo.edges.empty())
        throw ValidationError("gas topology needs at least one node and one edge");
    for (const auto& e : topo.edges) {
        if (!node_index.count(e.from) || !node_index.count(e.to))
            throw ValidationError("edge '" + e.name + "' references an undeclared node");
        if (e.from == e.to) throw ValidationError("edge '" + e.name + "' is a self-loop");
    }
    for (std::size_t k = 0; k < topo.nodes.size(); ++k) {
        const auto& node = topo.nodes[k];
        const auto deg = info[k].in_edges.size() + info[k].out_edges.size();
        switch (node.kind) {
            case NodeKind::Supply:
                if (!info[k].in_edges.empty())
                    throw ValidationError("supply node '" + node.name + "' has incoming pipes");
                if (info[k].out_edges.empty())
                    throw ValidationError("supply node '" + node.name + "' feeds no pipe");
                if (node.boundary <= 0.0)
                    throw ValidationError("supply node '" + node.name +
                                          "' needs a positive pressure");
                break;
            case NodeKind::Demand:
                if (info[k].in_edges.size() != 1 || !info[k].out_edges.empty())
                    throw ValidationError("demand node '" + node.name +
                                          "' must terminate exactly one pipe");
                break;
            case NodeKind::Junction:
                if (deg == 2)
                    throw ValidationError("interior node '" + node.name +
                                          "' has degree 2; contract it into a single edge "
                                          "before assembly");
                if (deg < 3)
                    throw ValidationError("junction node '" + node.name +
                                          "' must join at least three pipes");
                if (info[k].out_edges.empty())
                    throw ValidationError("junction node '" + node.name +
                                          "' has no outgoing pipe");
                if (info[k].in_edges.empty())
                    throw ValidationError("junction node '" + node.name +
                                          "' has no incoming pipe");
                break;
        }
    }
    // weak connectivity
    std::vector<Eigen::Index> parent(topo.nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<Eigen::Index(Eigen::Index)> find = [&](Eigen::Index x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
        return x;
    };
    for (const auto& e : topo.edges) {
        const auto a = find(node_index.at(e.from));
        const auto b = find(node_index.at(e.to));
        if (a != b) parent[static_cast<std::size_t>(a)] = b;
    }
    const auto root = find(0);
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(topo.nodes.size()); ++k)
        if (find(k) != root) throw ValidationError("gas topology is disconnected");
}

// Steady-flow heuristic for the default initial state: edges into demand
// nodes carry the demanded flow; junction inflow splits the known outflow
// equally. Trees resolve fully; anything left falls back to the mean demand.
std::vector<double> estimate_flows(const GasTopology& topo, const std::vector<NodeInfo>& info,
                                   const std::map<std::string, Eigen::Index>& node_index) {
    std::vector<std::optional<double>> flow(topo.edges.size());
    for (std::size_t k = 0; k < topo.edges.size(); ++k) {
        const auto& to = topo.nodes[static_cast<std::size_t>(node_index.at(topo.edges[k].to))];
        if (to.kind == NodeKind::Demand) flow[k] = to.boundary;
    }
    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t nk = 0; nk < topo.nodes.size(); ++nk) {
            if (topo.nodes[nk].kind != NodeKind::Junction) continue;
            const auto& jn = info[nk];
            const bool outs_known = std::all_of(jn.out_edges.begin(), jn.out_edges.end(),
                                                [&](Eigen::Index e) {
                                                    return flow[static_cast<std::size_t>(e)]
                                                        .has_value();
                                                });
            if (!outs_known) continue;
            double total = 0.0;
            for (auto e : jn.out_edges) total += *flow[static_cast<std::size_t>(e)];
            const double share = total / static_cast<double>(jn.in_edges.size());
            for (auto e : jn.in_edges) {
                auto& f = flow[static_cast<std::size_t>(e)];
                if (!f.has_value()) {
                    f = share;
                    progress = true;
                }
            }
        }
    }
    double mean_demand = 0.0;
    int demand_count = 0;
    for (const auto& node : topo.nodes)
        if (node.kind == NodeKind::Demand) {
            mean_demand += node.boundary;
            ++demand_count;
        }
    if (demand_count > 0) mean_demand /= demand_count;
    std::vector<double> out(topo.edges.size());
    for (std::size_t k = 0; k < topo.edges.size(); ++k)
        out[k] = flow[k].value_or(mean_demand);
    return out;
}

}  // namespace

AssembledNetwork assemble_gas_network(const GasTopology& topo, Scheme scheme) {
    std::map<std::string, Eigen::Index> node_index;
    for (std::size_t k = 0; k < topo.nodes.size(); ++k) {
        if (!node_index.emplace(topo.nodes[k].name, static_cast<Eigen::Index>(k)).second)
            throw ValidationError("duplicate node name '" + topo.nodes[k].name + "'");
    }
    std::vector<NodeInfo> info(topo.nodes.size());
    {
        std::set<std::string> edge_names;
        for (std::size_t k = 0; k < topo.edges.size(); ++k) {
            if (!edge_names.insert(topo.edges[k].name).second)
                throw ValidationError("duplicate edge name '" + topo.edges[k].name + "'");
            if (node_index.count(topo.edges[k].from))
                info[static_cast<std::size_t>(node_index.at(topo.edges[k].from))]
                    .out_edges.push_back(static_cast<Eigen::Index>(k));
            if (node_index.count(topo.edges[k].to))
                info[static_cast<std::size_t>(node_index.at(topo.edges[k].to))]
                    .in_edges.push_back(static_cast<Eigen::Index>(k));
        }
    }
    validate_topology(topo, info, node_index);

    std::vector<PipelineModel> pipes;
    pipes.reserve(topo.edges.size());
    for (const auto& e : topo.edges)
        pipes.push_back(scheme == Scheme::FVM ? discretize_pipeline_fvm(e.spec)
                                              : discretize_pipeline_fdm(e.spec));

    // State layout: per pipe [p-block; q-block], then one flow unknown per
    // (junction, incoming pipe) pair.
    Layout lay;
    lay.pipe_offset.resize(pipes.size());
    Eigen::Index off = 0;
    for (std::size_t k = 0; k < pipes.size(); ++k) {
        lay.pipe_offset[k] = off;
        off += pipes[k].state_dim();
    }
    std::vector<Eigen::Index> junctions;
    for (std::size_t nk = 0; nk < topo.nodes.size(); ++nk)
        if (topo.nodes[nk].kind == NodeKind::Junction)
            junctions.push_back(static_cast<Eigen::Index>(nk));
    lay.jvar.resize(junctions.size());
    lay.jrow_start.resize(junctions.size());
    for (std::size_t j = 0; j < junctions.size(); ++j) {
        lay.jrow_start[j] = off;
        const auto& jn = info[static_cast<std::size_t>(junctions[j])];
        for (std::size_t i = 0; i < jn.in_edges.size(); ++i) lay.jvar[j].push_back(off++);
    }
    lay.total = off;
    const Eigen::Index n = lay.total;

    auto p_state = [&](std::size_t pipe, Eigen::Index local) {
        return lay.pipe_offset[pipe] + local;
    };
    auto q_state = [&](std::size_t pipe, Eigen::Index local) {
        return lay.pipe_offset[pipe] + pipes[pipe].cells() + local;
    };
    auto outlet_pressure_state = [&](std::size_t pipe) {
        return p_state(pipe, pipes[pipe].cells() - 1);  // p_n
    };
    auto inlet_flow_state = [&](std::size_t pipe) { return q_state(pipe, 0); };  // q_1

    // Inputs: supply pressures (bar), then demand flows (kg/s).
    std::vector<Eigen::Index> supply_nodes, demand_nodes;
    for (std::size_t nk = 0; nk < topo.nodes.size(); ++nk) {
        if (topo.nodes[nk].kind == NodeKind::Supply)
            supply_nodes.push_back(static_cast<Eigen::Index>(nk));
        if (topo.nodes[nk].kind == NodeKind::Demand)
            demand_nodes.push_back(static_cast<Eigen::Index>(nk));
    }
    const auto m = static_cast<Eigen::Index>(supply_nodes.size() + demand_nodes.size());
    const auto p_out = static_cast<Eigen::Index>(demand_nodes.size() + supply_nodes.size());

    std::map<Eigen::Index, Eigen::Index> input_of_node;
    std::vector<std::string> input_names;
    for (std::size_t s = 0; s < supply_nodes.size(); ++s) {
        input_of_node[supply_nodes[s]] = static_cast<Eigen::Index>(s);
        input_names.push_back("p_s." + topo.nodes[static_cast<std::size_t>(supply_nodes[s])].name +
                              ".bar");
    }
    for (std::size_t d = 0; d < demand_nodes.size(); ++d) {
        input_of_node[demand_nodes[d]] = static_cast<Eigen::Index>(supply_nodes.size() + d);
        input_names.push_back("q_d." + topo.nodes[static_cast<std::size_t>(demand_nodes[d])].name +
                              ".kgps");
    }

    // Reference incoming pipe per junction: the junction pressure is read
    // from its outlet pressure state.
    std::map<Eigen::Index, std::size_t> ref_pipe_of_junction;
    for (std::size_t j = 0; j < junctions.size(); ++j) {
        const auto& jn = info[static_cast<std::size_t>(junctions[j])];
        ref_pipe_of_junction[junctions[j]] = static_cast<std::size_t>(jn.in_edges.front());
    }

    Matrix E = Matrix::Zero(n, n);
    Matrix A = Matrix::Zero(n, n);
    Matrix B = Matrix::Zero(n, m);
    Matrix C = Matrix::Zero(p_out, n);

    // Friction bookkeeping: where each pipe's supply pressure comes from.
    struct FrictionSource {
        bool from_input = false;
        Eigen::Index index = 0;  // input index (bar) or state index (Pa)
    };
    std::vector<FrictionSource> fsrc(pipes.size());

    for (std::size_t k = 0; k < pipes.size(); ++k) {
        const auto& pm = pipes[k];
        const Eigen::Index N = pm.cells();
        const Eigen::Index po = lay.pipe_offset[k];
        const Eigen::Index qo = po + N;

        E.block(po, po, N, N) = pm.Mp;
        E.block(qo, qo, N, N) = pm.Mq;
        A.block(po, qo, N, N) = pm.Kpq;
        A.block(qo, po, N, N) = pm.Kqp;

        const auto from_node = node_index.at(topo.edges[k].from);
        const auto to_node = node_index.at(topo.edges[k].to);

        if (topo.nodes[static_cast<std::size_t>(from_node)].kind == NodeKind::Supply) {
            B.block(qo, input_of_node.at(from_node), N, 1) = pm.Bp * kBarToPa;
            fsrc[k] = {true, input_of_node.at(from_node)};
        } else {  // junction-fed pipe: beta_p coupling to the junction pressure state
            const auto ref = ref_pipe_of_junction.at(from_node);
            const auto pn_col = outlet_pressure_state(ref);
            A.block(qo, pn_col, N, 1) += pm.Bp;
            fsrc[k] = {false, pn_col};
        }

        if (topo.nodes[static_cast<std::size_t>(to_node)].kind == NodeKind::Demand) {
            B.block(po, input_of_node.at(to_node), N, 1) = pm.Bq;
        } else {  // demand flow of this pipe is the junction unknown
            const auto jit = std::find(junctions.begin(), junctions.end(), to_node);
            const auto j = static_cast<std::size_t>(jit - junctions.begin());
            const auto& jn = info[static_cast<std::size_t>(to_node)];
            const auto pos = std::find(jn.in_edges.begin(), jn.in_edges.end(),
                                       static_cast<Eigen::Index>(k)) -
                             jn.in_edges.begin();
            const auto col = lay.jvar[j][static_cast<std::size_t>(pos)];
            A.block(po, col, N, 1) += pm.Bq;
        }
    }

    // Junction algebraic rows: flow balance, then pressure equality against
    // the reference incoming pipe.
    for (std::size_t j = 0; j < junctions.size(); ++j) {
        const auto& jn = info[static_cast<std::size_t>(junctions[j])];
        const Eigen::Index balance_row = lay.jrow_start[j];
        for (std::size_t i = 0; i < jn.in_edges.size(); ++i) A(balance_row, lay.jvar[j][i]) = 1.0;
        for (auto e : jn.out_edges)
            A(balance_row, inlet_flow_state(static_cast<std::size_t>(e))) = -1.0;

        const auto ref = static_cast<std::size_t>(jn.in_edges.front());
        for (std::size_t i = 1; i < jn.in_edges.size(); ++i) {
            const Eigen::Index row = lay.jrow_start[j] + static_cast<Eigen::Index>(i);
            A(row, outlet_pressure_state(ref)) = 1.0;
            A(row, outlet_pressure_state(static_cast<std::size_t>(jn.in_edges[i]))) = -1.0;
        }
    }

    std::vector<std::string> output_names;
    Eigen::Index out_row = 0;
    for (auto dn : demand_nodes) {
        const auto pipe = static_cast<std::size_t>(info[static_cast<std::size_t>(dn)].in_edges[0]);
        C(out_row, outlet_pressure_state(pipe)) = 1.0 / kBarToPa;
        output_names.push_back("p." + topo.nodes[static_cast<std::size_t>(dn)].name + ".bar");
        ++out_row;
    }
    for (auto sn : supply_nodes) {
        for (auto e : info[static_cast<std::size_t>(sn)].out_edges)
            C(out_row, inlet_flow_state(static_cast<std::size_t>(e))) = 1.0;
        output_names.push_back("q." + topo.nodes[static_cast<std::size_t>(sn)].name + ".kgps");
        ++out_row;
    }

    // Stacked friction term; rows carry the FDM scale where applicable.
    NonlinearTerm G = [pipes, lay, fsrc, n](const Vector& x, const Vector& u) {
        Vector g = Vector::Zero(n);
        for (std::size_t k = 0; k < pipes.size(); ++k) {
            const auto& pm = pipes[k];
            const Eigen::Index N = pm.cells();
            const Eigen::Index po = lay.pipe_offset[k];
            const double ps = fsrc[k].from_input ? u(fsrc[k].index) * kBarToPa : x(fsrc[k].index);
            const Vector p = x.segment(po, N);
            const Vector q = x.segment(po + N, N);
            g.segment(po + N, N) =
                friction_vector(pm, ps, p, q).cwiseProduct(pm.qrow_scale);
        }
        return g;
    };

    AssembledNetwork net;
    net.dae = make_dae(std::move(E), std::move(A), std::move(B), std::move(C), std::move(G));

    // Boundary input vector straight from the node table.
    net.u0 = Vector::Zero(m);
    for (auto sn : supply_nodes)
        net.u0(input_of_node.at(sn)) = topo.nodes[static_cast<std::size_t>(sn)].boundary;
    for (auto dn : demand_nodes)
        net.u0(input_of_node.at(dn)) = topo.nodes[static_cast<std::size_t>(dn)].boundary;

    // Default initial state: p at the upstream supply pressure, q at the
    // estimated steady flow, junction unknowns at the incoming pipe's flow.
    const auto flows = estimate_flows(topo, info, node_index);
    std::function<double(std::size_t)> upstream_pressure = [&](std::size_t pipe) -> double {
        const auto from = node_index.at(topo.edges[pipe].from);
        if (topo.nodes[static_cast<std::size_t>(from)].kind == NodeKind::Supply)
            return topo.nodes[static_cast<std::size_t>(from)].boundary * kBarToPa;
        return upstream_pressure(ref_pipe_of_junction.at(from));
    };
    net.x0 = Vector::Zero(n);
    for (std::size_t k = 0; k < pipes.size(); ++k) {
        const Eigen::Index N = pipes[k].cells();
        net.x0.segment(lay.pipe_offset[k], N).setConstant(upstream_pressure(k));
        net.x0.segment(lay.pipe_offset[k] + N, N).setConstant(flows[k]);
    }
    for (std::size_t j = 0; j < junctions.size(); ++j) {
        const auto& jn = info[static_cast<std::size_t>(junctions[j])];
        for (std::size_t i = 0; i < jn.in_edges.size(); ++i)
            net.x0(lay.jvar[j][i]) = flows[static_cast<std::size_t>(jn.in_edges[i])];
    }

    net.input_names = std::move(input_names);
    net.output_names = std::move(output_names);

    if (!junctions.empty()) {
        std::vector<std::vector<Eigen::Index>> jvars = lay.jvar;
        std::vector<std::vector<Eigen::Index>> jouts;
        for (auto jn_idx : junctions) {
            std::vector<Eigen::Index> outs;
            for (auto e : info[static_cast<std::size_t>(jn_idx)].out_edges)
                outs.push_back(inlet_flow_state(static_cast<std::size_t>(e)));
            jouts.push_back(std::move(outs));
        }
        net.constraint_residual = [jvars, jouts](const Vector& x) {
            double worst = 0.0;
            for (std::size_t j = 0; j < jvars.size(); ++j) {
                double r = 0.0;
                for (auto v : jvars[j]) r += x(v);
                for (auto s : jouts[j]) r -= x(s);
                worst = std::max(worst, std::abs(r));
            }
            return worst;
        };
    }
    return net;
}

}  // namespace netmor::gas
