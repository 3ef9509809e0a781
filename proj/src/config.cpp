#include "netmor/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace netmor {

namespace {

struct Entry {
    std::string key;  // full "section.key" path
    std::string value;
    int line = 0;
    bool consumed = false;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class EntryTable {
  public:
    EntryTable(const std::string& text, const std::string& origin) : origin_(origin) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        std::map<std::string, int> first_line;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                fail("expected 'section.key = value'", lineno);
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.find('.') == std::string::npos)
                fail("key '" + key + "' has no section prefix", lineno);
            if (value.empty()) fail("key '" + key + "' has an empty value", lineno);
            const auto prev = first_line.find(key);
            if (prev != first_line.end())
                fail("duplicate key '" + key + "' (first defined at line " +
                         std::to_string(prev->second) + ")",
                     lineno);
            first_line[key] = lineno;
            entries_.push_back({key, value, lineno, false});
        }
    }

    [[noreturn]] void fail(const std::string& msg, int line) const {
        throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
    }

    [[noreturn]] void fail_key(const std::string& key, const std::string& msg) const {
        for (const auto& e : entries_)
            if (e.key == key) fail(msg, e.line);
        throw ConfigError(origin_ + ": " + key + ": " + msg);
    }

    // Returns the value and marks the entry consumed.
    std::optional<std::string> take(const std::string& key) {
        for (auto& e : entries_) {
            if (e.key == key) {
                e.consumed = true;
                return e.value;
            }
        }
        return std::nullopt;
    }

    std::string require(const std::string& key) {
        auto v = take(key);
        if (!v) throw ConfigError(origin_ + ": missing key '" + key + "'");
        return *v;
    }

    double take_double(const std::string& key, double fallback) {
        auto v = take(key);
        return v ? parse_double(key, *v) : fallback;
    }

    std::optional<double> take_double_opt(const std::string& key) {
        auto v = take(key);
        if (!v) return std::nullopt;
        return parse_double(key, *v);
    }

    int take_int(const std::string& key, int fallback) {
        auto v = take(key);
        if (!v) return fallback;
        return static_cast<int>(parse_double(key, *v));
    }

    double parse_double(const std::string& key, const std::string& text) const {
        try {
            std::size_t pos = 0;
            const double d = std::stod(text, &pos);
            if (pos != text.size()) throw std::invalid_argument(text);
            return d;
        } catch (const std::exception&) {
            fail_key(key, "cannot parse number '" + text + "'");
        }
    }

    // Ordered list of entries in a section, in file order.
    std::vector<Entry*> section(const std::string& prefix) {
        std::vector<Entry*> out;
        for (auto& e : entries_)
            if (e.key.rfind(prefix + ".", 0) == 0) out.push_back(&e);
        return out;
    }

    void reject_unconsumed() const {
        for (const auto& e : entries_)
            if (!e.consumed) fail("unknown key '" + e.key + "'", e.line);
    }

    [[nodiscard]] bool has_section(const std::string& prefix) const {
        for (const auto& e : entries_)
            if (e.key.rfind(prefix + ".", 0) == 0) return true;
        return false;
    }

  private:
    std::string origin_;
    std::vector<Entry> entries_;
};

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

void parse_gas(EntryTable& t, NetworkConfig& cfg) {
    std::set<std::string> node_names;
    for (Entry* e : t.section("node")) {
        e->consumed = true;
        gas::GasNode node;
        node.name = e->key.substr(5);
        if (e->value == "supply")
            node.kind = gas::NodeKind::Supply;
        else if (e->value == "demand")
            node.kind = gas::NodeKind::Demand;
        else if (e->value == "junction")
            node.kind = gas::NodeKind::Junction;
        else
            t.fail("node '" + node.name + "' has unknown kind '" + e->value + "'", e->line);
        cfg.gas_topology.nodes.push_back(node);
        node_names.insert(node.name);
    }
    for (Entry* e : t.section("edge")) {
        e->consumed = true;
        gas::GasEdge edge;
        edge.name = e->key.substr(5);
        const auto ends = split_ws(e->value);
        if (ends.size() != 2) t.fail("edge '" + edge.name + "' needs '<from> <to>'", e->line);
        edge.from = ends[0];
        edge.to = ends[1];
        if (!node_names.count(edge.from) || !node_names.count(edge.to))
            t.fail("edge '" + edge.name + "' references an undeclared node", e->line);
        cfg.gas_topology.edges.push_back(edge);
    }
    if (cfg.gas_topology.edges.empty()) throw ConfigError("missing section: edge");
    for (auto& edge : cfg.gas_topology.edges) {
        const std::string p = "pipe." + edge.name;
        edge.spec.length = t.parse_double(p + ".length", t.require(p + ".length"));
        edge.spec.diameter = t.parse_double(p + ".diameter", t.require(p + ".diameter"));
        if (auto a = t.take_double_opt(p + ".area")) edge.spec.area = *a;
        edge.spec.friction = t.take_double(p + ".friction", edge.spec.friction);
        edge.spec.sound_speed_sq = t.take_double(p + ".sound_speed_sq", edge.spec.sound_speed_sq);
        edge.spec.mesh = t.parse_double(p + ".mesh", t.require(p + ".mesh"));
    }
    for (auto& node : cfg.gas_topology.nodes) {
        if (node.kind == gas::NodeKind::Supply)
            node.boundary = t.parse_double("boundary." + node.name + ".pressure",
                                           t.require("boundary." + node.name + ".pressure"));
        else if (node.kind == gas::NodeKind::Demand)
            node.boundary = t.parse_double("boundary." + node.name + ".flow",
                                           t.require("boundary." + node.name + ".flow"));
    }
}

void parse_water(EntryTable& t, NetworkConfig& cfg) {
    std::set<std::string> node_names;
    for (Entry* e : t.section("node")) {
        e->consumed = true;
        water::WaterNode node;
        node.name = e->key.substr(5);
        if (e->value == "pressure")
            node.kind = water::NodeKind::Pressure;
        else if (e->value == "demand")
            node.kind = water::NodeKind::Demand;
        else
            t.fail("node '" + node.name + "' has unknown kind '" + e->value + "'", e->line);
        cfg.water_network.nodes.push_back(node);
        node_names.insert(node.name);
    }
    for (Entry* e : t.section("edge")) {
        e->consumed = true;
        water::WaterEdge edge;
        edge.name = e->key.substr(5);
        const auto ends = split_ws(e->value);
        if (ends.size() != 2) t.fail("edge '" + edge.name + "' needs '<from> <to>'", e->line);
        edge.from = ends[0];
        edge.to = ends[1];
        if (!node_names.count(edge.from) || !node_names.count(edge.to))
            t.fail("edge '" + edge.name + "' references an undeclared node", e->line);
        cfg.water_network.edges.push_back(edge);
    }
    if (cfg.water_network.edges.empty()) throw ConfigError("missing section: edge");
    for (auto& edge : cfg.water_network.edges) {
        const std::string p = "pipe." + edge.name;
        edge.spec.length = t.parse_double(p + ".length", t.require(p + ".length"));
        edge.spec.area = t.parse_double(p + ".area", t.require(p + ".area"));
        edge.spec.diameter = t.parse_double(p + ".diameter", t.require(p + ".diameter"));
        edge.spec.friction = t.take_double(p + ".friction", edge.spec.friction);
        edge.spec.elevation = t.take_double(p + ".elevation", edge.spec.elevation);
        edge.spec.density = t.take_double(p + ".density", edge.spec.density);
    }
    for (auto& node : cfg.water_network.nodes) {
        if (node.kind == water::NodeKind::Pressure)
            node.boundary = t.parse_double("boundary." + node.name + ".pressure",
                                           t.require("boundary." + node.name + ".pressure"));
        else
            node.boundary = t.take_double("boundary." + node.name + ".flow", 0.0);
    }
}

void parse_power(EntryTable& t, NetworkConfig& cfg) {
    std::map<std::string, int> line_index;
    for (Entry* e : t.section("line")) {
        // collect distinct line names from `line.<name>.<param>` keys
        const std::string rest = e->key.substr(5);
        const auto dot = rest.find('.');
        if (dot == std::string::npos) t.fail("expected line.<name>.<param>", e->line);
        const std::string name = rest.substr(0, dot);
        if (!line_index.count(name)) {
            line_index[name] = static_cast<int>(cfg.line_names.size());
            cfg.line_names.push_back(name);
            cfg.lines.emplace_back();
        }
    }
    if (cfg.lines.empty()) throw ConfigError("missing section: line");
    for (std::size_t k = 0; k < cfg.line_names.size(); ++k) {
        const std::string p = "line." + cfg.line_names[k];
        auto& spec = cfg.lines[k];
        spec.resistance = t.parse_double(p + ".resistance", t.require(p + ".resistance"));
        spec.inductance = t.parse_double(p + ".inductance", t.require(p + ".inductance"));
        spec.capacitance = t.parse_double(p + ".capacitance", t.require(p + ".capacitance"));
        spec.conductance = t.take_double(p + ".conductance", 0.0);
        spec.length = t.parse_double(p + ".length", t.require(p + ".length"));
        spec.segments = t.take_int(p + ".segments", 1);
    }
    std::map<std::string, int> bus_index;
    for (Entry* e : t.section("bus")) {
        const std::string rest = e->key.substr(4);
        const auto dot = rest.find('.');
        const std::string name = dot == std::string::npos ? rest : rest.substr(0, dot);
        if (!bus_index.count(name)) {
            bus_index[name] = static_cast<int>(cfg.buses.buses.size());
            power::Bus bus;
            bus.name = name;
            cfg.buses.buses.push_back(bus);
        }
    }
    for (auto& bus : cfg.buses.buses) {
        const std::string p = "bus." + bus.name;
        const std::string kind = t.require(p);
        if (kind == "generator")
            bus.kind = power::BusKind::Generator;
        else if (kind == "load")
            bus.kind = power::BusKind::Load;
        else
            t.fail_key(p, "unknown bus kind '" + kind + "'");
        bus.p_load = t.take_double(p + ".p_load", 0.0);
        bus.e_internal = t.take_double(p + ".e_internal", 0.0);
        bus.x_reactance = t.take_double(p + ".x_reactance", 0.0);
        bus.alpha = t.take_double(p + ".alpha", 0.0);
        const std::string line_name = t.require(p + ".line");
        if (!line_index.count(line_name))
            t.fail_key(p + ".line", "bus references unknown line '" + line_name + "'");
        bus.line = line_index[line_name];
        const auto end = t.take(p + ".end");
        bus.at_head = !end || *end == "head";
        if (end && *end != "head" && *end != "tail")
            t.fail_key(p + ".end", "expected head or tail");
    }
    const auto nb = static_cast<Eigen::Index>(cfg.buses.buses.size());
    cfg.buses.G_adm = Matrix::Zero(nb, nb);
    cfg.buses.B_adm = Matrix::Zero(nb, nb);
    for (Entry* e : t.section("admittance")) {
        const std::string rest = e->key.substr(11);
        const auto d1 = rest.find('.');
        const auto d2 = rest.find('.', d1 + 1);
        if (d1 == std::string::npos || d2 == std::string::npos)
            t.fail("expected admittance.<bus>.<bus>.{g|b}", e->line);
        const std::string b1 = rest.substr(0, d1);
        const std::string b2 = rest.substr(d1 + 1, d2 - d1 - 1);
        const std::string part = rest.substr(d2 + 1);
        if (!bus_index.count(b1) || !bus_index.count(b2))
            t.fail("admittance references unknown bus", e->line);
        e->consumed = true;
        const double v = t.parse_double(e->key, e->value);
        auto& M = part == "g" ? cfg.buses.G_adm : cfg.buses.B_adm;
        if (part != "g" && part != "b") t.fail("expected .g or .b", e->line);
        M(bus_index[b1], bus_index[b2]) = v;
        M(bus_index[b2], bus_index[b1]) = v;
    }
}

}  // namespace

NetworkConfig parse_config_text(const std::string& text, const std::string& origin) {
    EntryTable t(text, origin);
    if (!t.has_section("network")) throw ConfigError("missing section: network");

    NetworkConfig cfg;
    cfg.domain = t.require("network.domain");
    if (cfg.domain == "gas") {
        auto scheme = t.take("network.scheme");
        cfg.scheme = scheme.value_or("fvm");
        if (cfg.scheme != "fvm" && cfg.scheme != "fdm")
            t.fail_key("network.scheme", "expected fvm or fdm");
        parse_gas(t, cfg);
    } else if (cfg.domain == "water") {
        parse_water(t, cfg);
    } else if (cfg.domain == "power") {
        parse_power(t, cfg);
    } else {
        t.fail_key("network.domain", "expected gas, water, or power");
    }

    cfg.solver.tau = t.take_double("solver.tau", cfg.solver.tau);
    cfg.solver.max_iter = t.take_int("solver.max_iter", cfg.solver.max_iter);
    cfg.solver.settle_tol = t.take_double("solver.settle_tol", cfg.solver.settle_tol);
    cfg.solver.record_every = t.take_int("solver.record_every", cfg.solver.record_every);
    if (cfg.solver.tau <= 0.0) t.fail_key("solver.tau", "step size must be positive");
    if (cfg.solver.max_iter < 1) t.fail_key("solver.max_iter", "must be at least 1");
    if (cfg.solver.settle_tol <= 0.0) t.fail_key("solver.settle_tol", "must be positive");

    if (t.has_section("mor")) {
        cfg.mor.present = true;
        cfg.mor.r = t.take_int("mor.r", 0);
        if (cfg.mor.r < 1) t.fail_key("mor.r", "reduced order must be at least 1");
        cfg.mor.tol = t.take_double("mor.tol", cfg.mor.tol);
        cfg.mor.max_iter = t.take_int("mor.max_iter", cfg.mor.max_iter);
        if (auto preset = t.take("mor.shift_preset")) {
            if (*preset != "logspace") t.fail_key("mor.shift_preset", "only 'logspace' is defined");
            cfg.mor.shift_preset = *preset;
        }
    }

    t.reject_unconsumed();
    return cfg;
}

NetworkConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

namespace {

std::string fmt(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace

std::string serialize_config(const NetworkConfig& cfg) {
    std::ostringstream out;
    out << "network.domain = " << cfg.domain << "\n";
    if (cfg.domain == "gas") {
        out << "network.scheme = " << cfg.scheme << "\n";
        for (const auto& n : cfg.gas_topology.nodes) {
            const char* kind = n.kind == gas::NodeKind::Supply    ? "supply"
                               : n.kind == gas::NodeKind::Demand ? "demand"
                                                                 : "junction";
            out << "node." << n.name << " = " << kind << "\n";
        }
        for (const auto& e : cfg.gas_topology.edges)
            out << "edge." << e.name << " = " << e.from << " " << e.to << "\n";
        for (const auto& e : cfg.gas_topology.edges) {
            out << "pipe." << e.name << ".length = " << fmt(e.spec.length) << "\n";
            out << "pipe." << e.name << ".diameter = " << fmt(e.spec.diameter) << "\n";
            if (e.spec.area > 0.0) out << "pipe." << e.name << ".area = " << fmt(e.spec.area) << "\n";
            out << "pipe." << e.name << ".friction = " << fmt(e.spec.friction) << "\n";
            out << "pipe." << e.name << ".sound_speed_sq = " << fmt(e.spec.sound_speed_sq) << "\n";
            out << "pipe." << e.name << ".mesh = " << fmt(e.spec.mesh) << "\n";
        }
        for (const auto& n : cfg.gas_topology.nodes) {
            if (n.kind == gas::NodeKind::Supply)
                out << "boundary." << n.name << ".pressure = " << fmt(n.boundary) << "\n";
            else if (n.kind == gas::NodeKind::Demand)
                out << "boundary." << n.name << ".flow = " << fmt(n.boundary) << "\n";
        }
    } else if (cfg.domain == "water") {
        for (const auto& n : cfg.water_network.nodes)
            out << "node." << n.name << " = "
                << (n.kind == water::NodeKind::Pressure ? "pressure" : "demand") << "\n";
        for (const auto& e : cfg.water_network.edges)
            out << "edge." << e.name << " = " << e.from << " " << e.to << "\n";
        for (const auto& e : cfg.water_network.edges) {
            out << "pipe." << e.name << ".length = " << fmt(e.spec.length) << "\n";
            out << "pipe." << e.name << ".area = " << fmt(e.spec.area) << "\n";
            out << "pipe." << e.name << ".diameter = " << fmt(e.spec.diameter) << "\n";
            out << "pipe." << e.name << ".friction = " << fmt(e.spec.friction) << "\n";
            out << "pipe." << e.name << ".elevation = " << fmt(e.spec.elevation) << "\n";
            out << "pipe." << e.name << ".density = " << fmt(e.spec.density) << "\n";
        }
        for (const auto& n : cfg.water_network.nodes) {
            if (n.kind == water::NodeKind::Pressure)
                out << "boundary." << n.name << ".pressure = " << fmt(n.boundary) << "\n";
            else
                out << "boundary." << n.name << ".flow = " << fmt(n.boundary) << "\n";
        }
    } else if (cfg.domain == "power") {
        for (std::size_t k = 0; k < cfg.line_names.size(); ++k) {
            const auto& s = cfg.lines[k];
            const auto& name = cfg.line_names[k];
            out << "line." << name << ".resistance = " << fmt(s.resistance) << "\n";
            out << "line." << name << ".inductance = " << fmt(s.inductance) << "\n";
            out << "line." << name << ".capacitance = " << fmt(s.capacitance) << "\n";
            out << "line." << name << ".conductance = " << fmt(s.conductance) << "\n";
            out << "line." << name << ".length = " << fmt(s.length) << "\n";
            out << "line." << name << ".segments = " << s.segments << "\n";
        }
        for (const auto& b : cfg.buses.buses) {
            out << "bus." << b.name << " = "
                << (b.kind == power::BusKind::Generator ? "generator" : "load") << "\n";
            out << "bus." << b.name << ".p_load = " << fmt(b.p_load) << "\n";
            if (b.kind == power::BusKind::Generator) {
                out << "bus." << b.name << ".e_internal = " << fmt(b.e_internal) << "\n";
                out << "bus." << b.name << ".x_reactance = " << fmt(b.x_reactance) << "\n";
                out << "bus." << b.name << ".alpha = " << fmt(b.alpha) << "\n";
            }
            out << "bus." << b.name << ".line = " << cfg.line_names[static_cast<std::size_t>(b.line)]
                << "\n";
            out << "bus." << b.name << ".end = " << (b.at_head ? "head" : "tail") << "\n";
        }
        for (Eigen::Index i = 0; i < cfg.buses.G_adm.rows(); ++i)
            for (Eigen::Index j = i; j < cfg.buses.G_adm.cols(); ++j) {
                if (cfg.buses.G_adm(i, j) != 0.0)
                    out << "admittance." << cfg.buses.buses[static_cast<std::size_t>(i)].name << "."
                        << cfg.buses.buses[static_cast<std::size_t>(j)].name
                        << ".g = " << fmt(cfg.buses.G_adm(i, j)) << "\n";
                if (cfg.buses.B_adm(i, j) != 0.0)
                    out << "admittance." << cfg.buses.buses[static_cast<std::size_t>(i)].name << "."
                        << cfg.buses.buses[static_cast<std::size_t>(j)].name
                        << ".b = " << fmt(cfg.buses.B_adm(i, j)) << "\n";
            }
    }
    out << "solver.tau = " << fmt(cfg.solver.tau) << "\n";
    out << "solver.max_iter = " << cfg.solver.max_iter << "\n";
    out << "solver.settle_tol = " << fmt(cfg.solver.settle_tol) << "\n";
    out << "solver.record_every = " << cfg.solver.record_every << "\n";
    if (cfg.mor.present) {
        out << "mor.r = " << cfg.mor.r << "\n";
        out << "mor.tol = " << fmt(cfg.mor.tol) << "\n";
        out << "mor.max_iter = " << cfg.mor.max_iter << "\n";
        out << "mor.shift_preset = " << cfg.mor.shift_preset << "\n";
    }
    return out.str();
}

}  // namespace netmor
