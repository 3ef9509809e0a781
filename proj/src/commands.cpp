#include "netmor/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "netmor/tirka.hpp"

namespace netmor {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g(static_cast<std::size_t>(count));
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < count; ++i)
        g[static_cast<std::size_t>(i)] =
            std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) /
                                    static_cast<double>(count - 1));
    return g;
}

std::string balance_column_name(const std::string& domain) {
    if (domain == "gas") return "junction_balance";
    if (domain == "water") return "node_balance";
    return "constraint_residual";
}

StepperConfig stepper_from(const SolverBlock& s) {
    StepperConfig cfg;
    cfg.tau = s.tau;
    cfg.max_iter = s.max_iter;
    cfg.settle_tol = s.settle_tol;
    cfg.record_every = s.record_every;
    return cfg;
}

RunManifest base_manifest(const NetworkConfig& cfg) {
    RunManifest m;
    m.tool_version = kToolVersion;
    m.config_hash = "fnv1a:" + hex64(fnv1a64(serialize_config(cfg)));
    return m;
}

tirka::TirkaConfig mor_config(const AssembledNetwork& net, const MorBlock& mor) {
    auto tcfg = tirka::default_config(linear_part(net.dae), mor.r);
    tcfg.tol = mor.tol;
    tcfg.max_iter = mor.max_iter;
    return tcfg;
}

}  // namespace

AssembledNetwork assemble_from_config(const NetworkConfig& cfg) {
    if (cfg.domain == "gas")
        return gas::assemble_gas_network(cfg.gas_topology, cfg.scheme == "fdm"
                                                               ? gas::Scheme::FDM
                                                               : gas::Scheme::FVM);
    if (cfg.domain == "water") return water::assemble_water(cfg.water_network);
    if (cfg.domain == "power") return power::assemble_power(cfg.lines, cfg.buses);
    throw ConfigError("unknown domain '" + cfg.domain + "'");
}

RunManifest cmd_simulate(const NetworkConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunManifest m = base_manifest(cfg);

    const auto t0 = Clock::now();
    const AssembledNetwork net = assemble_from_config(cfg);
    m.phase_seconds.emplace_back("assemble", seconds_since(t0));

    const SimulationResult sim = simulate(net.dae, net.x0, net.u0, stepper_from(cfg.solver));
    m.phase_seconds.emplace_back("factorization", sim.factorization_seconds);
    m.phase_seconds.emplace_back("stepping", sim.stepping_seconds);

    std::vector<std::string> columns{"t"};
    for (const auto& name : net.output_names) columns.push_back(name);
    const bool has_balance = static_cast<bool>(net.constraint_residual);
    if (has_balance) columns.push_back(balance_column_name(cfg.domain));
    CsvWriter csv(columns);
    for (std::size_t k = 0; k < sim.time.size(); ++k) {
        std::vector<double> row{sim.time[k]};
        for (Eigen::Index i = 0; i < sim.outputs[k].size(); ++i) row.push_back(sim.outputs[k](i));
        if (has_balance) row.push_back(net.constraint_residual(sim.states[k]));
        csv.add_row(row);
    }
    csv.write(out_dir / "trajectory.csv");
    m.artifacts.push_back("trajectory.csv");
    m.extra.emplace_back("settled", sim.settled ? "true" : "false");
    m.extra.emplace_back("settle_step", std::to_string(sim.settle_step));
    m.extra.emplace_back("steps_taken", std::to_string(sim.steps_taken));
    write_manifest(m, out_dir / "manifest.txt");
    return m;
}

RunManifest cmd_reduce(const NetworkConfig& cfg, const std::filesystem::path& out_dir) {
    if (!cfg.mor.present) throw ConfigError("reduce requires a mor block in the config");
    std::filesystem::create_directories(out_dir);
    RunManifest m = base_manifest(cfg);

    const auto t0 = Clock::now();
    const AssembledNetwork net = assemble_from_config(cfg);
    m.phase_seconds.emplace_back("assemble", seconds_since(t0));

    const auto t1 = Clock::now();
    const tirka::ReducedModel rom = tirka::reduce(net.dae, mor_config(net, cfg.mor));
    m.phase_seconds.emplace_back("reduction", seconds_since(t1));
    m.reduction_converged = rom.converged;

    save_reduced_model(rom, out_dir / "reduced_model.csv");
    m.artifacts.push_back("reduced_model.csv");

    const LinearPart lin = linear_part(net.dae);
    const auto residuals = tirka::verify_interpolation(lin, rom);
    CsvWriter report({"shift_re", "shift_im", "right_residual", "left_residual",
                      "bitangential_residual"});
    for (const auto& r : residuals)
        report.add_row({r.shift.real(), r.shift.imag(), r.right, r.left, r.bitangential});
    report.write(out_dir / "interp_report.csv");
    m.artifacts.push_back("interp_report.csv");

    const auto grid = log_grid(1e-4, 1e4, 200);
    const auto full_sweep = sigma_max_sweep(lin, grid);
    CsvWriter bode({"omega", "sigma_max_full", "sigma_max_reduced"});
    for (const auto& [w, sf] : full_sweep) {
        Eigen::JacobiSVD<CMatrix> svd(rom.eval_transfer(Complex(0.0, w)));
        bode.add_row({w, sf, svd.singularValues()(0)});
    }
    bode.write(out_dir / "bode.csv");
    m.artifacts.push_back("bode.csv");

    CsvWriter hist({"iteration", "shift_change"});
    for (std::size_t i = 0; i < rom.history.size(); ++i)
        hist.add_row({static_cast<double>(i + 1), rom.history[i]});
    hist.write(out_dir / "history.csv");
    m.artifacts.push_back("history.csv");

    m.extra.emplace_back("reduction_converged", rom.converged ? "true" : "false");
    write_manifest(m, out_dir / "manifest.txt");
    return m;
}

namespace {

struct PairedRun {
    std::vector<double> time;
    std::vector<Vector> y_full;
    std::vector<Vector> y_red;
    double full_seconds = 0.0;
    double red_seconds = 0.0;
};

PairedRun paired_simulation(const AssembledNetwork& net, const tirka::ReducedModel& rom,
                            const SolverBlock& solver) {
    StepperConfig cfg = stepper_from(solver);
    cfg.detect_settle = false;  // aligned grids for the error metrics

    PairedRun out;
    const SimulationResult full = simulate(net.dae, net.x0, net.u0, cfg);
    out.full_seconds = full.stepping_seconds;

    // reduced system simulated in its own coordinates; outputs add Dr*u
    UnifiedDae red = make_dae(rom.Er, rom.Ahat, rom.Bhat, rom.Chat, rom.Gr);
    const Vector xr0 = rom.V.colPivHouseholderQr().solve(net.x0);
    const SimulationResult redsim = simulate(red, xr0, net.u0, cfg);
    out.red_seconds = redsim.stepping_seconds;

    const Vector feed = rom.Dr * net.u0;
    out.time = full.time;
    out.y_full = full.outputs;
    out.y_red.reserve(redsim.outputs.size());
    for (const auto& y : redsim.outputs) out.y_red.push_back(y + feed);
    return out;
}

}  // namespace

RunManifest cmd_compare(const NetworkConfig& cfg, const std::filesystem::path& out_dir,
                        const std::optional<std::filesystem::path>& use_saved) {
    if (!cfg.mor.present) throw ConfigError("compare requires a mor block in the config");
    std::filesystem::create_directories(out_dir);
    RunManifest m = base_manifest(cfg);

    const auto t0 = Clock::now();
    const AssembledNetwork net = assemble_from_config(cfg);
    m.phase_seconds.emplace_back("assemble", seconds_since(t0));

    tirka::ReducedModel rom;
    if (use_saved) {
        rom = load_reduced_model(*use_saved);
        if (net.dae.G) {
            const Matrix V = rom.V, W = rom.W;
            const NonlinearTerm G = net.dae.G;
            rom.Gr = [V, W, G](const Vector& xr, const Vector& u) {
                return Vector(W.transpose() * G(V * xr, u));
            };
        }
    } else {
        const auto t1 = Clock::now();
        rom = tirka::reduce(net.dae, mor_config(net, cfg.mor));
        m.phase_seconds.emplace_back("reduction", seconds_since(t1));
        save_reduced_model(rom, out_dir / "reduced_model.csv");
        m.artifacts.push_back("reduced_model.csv");
    }
    m.reduction_converged = rom.converged;

    const PairedRun run = paired_simulation(net, rom, cfg.solver);

    std::vector<std::string> columns{"t"};
    for (const auto& name : net.output_names) columns.push_back("full." + name);
    for (const auto& name : net.output_names) columns.push_back("reduced." + name);
    CsvWriter csv(columns);
    for (std::size_t k = 0; k < run.time.size(); ++k) {
        std::vector<double> row{run.time[k]};
        for (Eigen::Index i = 0; i < run.y_full[k].size(); ++i) row.push_back(run.y_full[k](i));
        for (Eigen::Index i = 0; i < run.y_red[k].size(); ++i) row.push_back(run.y_red[k](i));
        csv.add_row(row);
    }
    csv.write(out_dir / "compare.csv");
    m.artifacts.push_back("compare.csv");

    // per-channel scale-normalized error metrics
    const auto p = static_cast<Eigen::Index>(net.output_names.size());
    double max_rel = 0.0, mean_acc = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
        double scale = 0.0;
        for (const auto& y : run.y_full) scale = std::max(scale, std::abs(y(i)));
        if (scale == 0.0) scale = 1.0;
        for (std::size_t k = 0; k < run.time.size(); ++k) {
            const double err = std::abs(run.y_full[k](i) - run.y_red[k](i)) / scale;
            max_rel = std::max(max_rel, err);
            mean_acc += err;
            ++count;
        }
    }
    const double mean_rel = count ? mean_acc / static_cast<double>(count) : 0.0;
    CsvWriter summary({"max_rel_error", "mean_rel_error"});
    summary.add_row({max_rel, mean_rel});
    summary.write(out_dir / "compare_summary.csv");
    m.artifacts.push_back("compare_summary.csv");

    const double speedup = run.red_seconds > 0.0 ? run.full_seconds / run.red_seconds : 0.0;
    m.phase_seconds.emplace_back("full_step_loop", run.full_seconds);
    m.phase_seconds.emplace_back("reduced_step_loop", run.red_seconds);
    m.extra.emplace_back("speedup", format_double(speedup));
    m.extra.emplace_back("max_rel_error", format_double(max_rel));
    write_manifest(m, out_dir / "manifest.txt");
    return m;
}

RunManifest cmd_bench(const NetworkConfig& cfg, const std::vector<double>& step_sizes,
                      const std::filesystem::path& out_dir) {
    if (cfg.domain != "gas") throw ConfigError("bench requires a gas config");
    if (step_sizes.empty()) throw ConfigError("bench needs a nonempty step list");
    for (std::size_t k = 0; k < step_sizes.size(); ++k) {
        if (step_sizes[k] <= 0.0) throw ConfigError("step sizes must be positive");
        if (k > 0 && step_sizes[k] >= step_sizes[k - 1])
            throw ConfigError("step sizes must be strictly descending");
    }
    std::filesystem::create_directories(out_dir);
    RunManifest m = base_manifest(cfg);

    const AssembledNetwork fvm = gas::assemble_gas_network(cfg.gas_topology, gas::Scheme::FVM);
    const AssembledNetwork fdm = gas::assemble_gas_network(cfg.gas_topology, gas::Scheme::FDM);

    const double horizon = cfg.solver.tau * cfg.solver.max_iter;
    constexpr int kRepeats = 9;

    auto time_loop = [&](const AssembledNetwork& net, double tau, int steps) {
        std::vector<double> samples;
        samples.reserve(kRepeats);
        StepperConfig scfg;
        scfg.tau = tau;
        scfg.max_iter = steps;
        scfg.detect_settle = false;
        scfg.record_every = std::max(1, steps);  // keep recording out of the loop
        for (int rep = 0; rep < kRepeats; ++rep) {
            const SimulationResult sim = simulate(net.dae, net.x0, net.u0, scfg);
            samples.push_back(sim.stepping_seconds);
        }
        std::sort(samples.begin(), samples.end());
        return samples[samples.size() / 2];
    };

    CsvWriter csv({"tau", "steps", "wall_time_fvm", "wall_time_fdm"});
    for (double tau : step_sizes) {
        const int steps = std::max(1, static_cast<int>(std::lround(horizon / tau)));
        const double t_fvm = time_loop(fvm, tau, steps);
        const double t_fdm = time_loop(fdm, tau, steps);
        csv.add_row({tau, static_cast<double>(steps), t_fvm, t_fdm});
    }
    csv.write(out_dir / "bench.csv");
    m.artifacts.push_back("bench.csv");
    write_manifest(m, out_dir / "manifest.txt");
    return m;
}

}  // namespace netmor
