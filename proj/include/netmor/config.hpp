#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "netmor/gas.hpp"
#include "netmor/power.hpp"
#include "netmor/water.hpp"

namespace netmor {

struct SolverBlock {
    double tau = 0.5;
    int max_iter = 1000;
    double settle_tol = 1e-8;
    int record_every = 1;
};

struct MorBlock {
    bool present = false;
    int r = 0;
    double tol = 1e-6;
    int max_iter = 100;
    std::string shift_preset = "logspace";
};

/// Parsed and validated experiment description. Exactly one domain's tables
/// are populated, matching the declared `network.domain`.
struct NetworkConfig {
    std::string domain;  ///< gas | water | power
    std::string scheme = "fvm";  ///< gas only

    gas::GasTopology gas_topology;
    water::WaterNetwork water_network;
    std::vector<std::string> line_names;
    std::vector<power::LineSpec> lines;
    power::BusSystem buses;

    SolverBlock solver;
    MorBlock mor;
};

/// Reads the line-oriented `section.key = value` format. Unknown keys,
/// duplicate keys (both line numbers are reported), and referential breaks
/// raise ConfigError with the offending key path.
NetworkConfig parse_config(const std::filesystem::path& path);
NetworkConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

/// Canonical re-emission; parse(serialize(cfg)) reproduces cfg.
std::string serialize_config(const NetworkConfig& cfg);

}  // namespace netmor
