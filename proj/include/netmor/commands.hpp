#pragma once

#include <filesystem>
#include <optional>

#include "netmor/config.hpp"
#include "netmor/integrator.hpp"
#include "netmor/io.hpp"
#include "netmor/net_model.hpp"

namespace netmor {

inline constexpr const char* kToolVersion = "netmor 0.1.0";

/// Builds the domain DAE named by the config.
AssembledNetwork assemble_from_config(const NetworkConfig& cfg);

/// Assembles, simulates, writes trajectory.csv + manifest.txt.
RunManifest cmd_simulate(const NetworkConfig& cfg, const std::filesystem::path& out_dir);

/// Runs tangential IRKA on the linear part, writes reduced_model.csv,
/// interp_report.csv, bode.csv (full vs reduced sigma-max over 200 points in
/// [1e-4, 1e4]) and manifest.txt. An unconverged iteration still writes all
/// artifacts; the manifest carries the flag.
RunManifest cmd_reduce(const NetworkConfig& cfg, const std::filesystem::path& out_dir);

/// Simulates full and reduced nonlinear models on identical inputs; writes
/// compare.csv (paired outputs), compare_summary.csv (error metrics) and the
/// speedup into manifest.txt. `use_saved` replays a reduced_model.csv bundle
/// instead of re-running the reduction.
RunManifest cmd_compare(const NetworkConfig& cfg, const std::filesystem::path& out_dir,
                        const std::optional<std::filesystem::path>& use_saved = std::nullopt);

/// Times the step loop at each step size for both discretization schemes
/// over a fixed horizon (tau * max_iter from the solver block); writes
/// bench.csv with one row per step size.
RunManifest cmd_bench(const NetworkConfig& cfg, const std::vector<double>& step_sizes,
                      const std::filesystem::path& out_dir);

}  // namespace netmor
