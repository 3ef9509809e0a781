#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "netmor/commands.hpp"

namespace {

std::vector<double> parse_steps(const std::string& csv) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"netmor: energy-network assembly, transient simulation, and "
                 "interpolatory model reduction"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string steps = "1.0,0.5,0.25,0.1";
    std::string saved_model;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file")->required();
        cmd->add_option("--out", out_dir, "output directory");
    };
    auto* sim = app.add_subcommand("simulate", "assemble and integrate the network");
    add_common(sim);
    auto* red = app.add_subcommand("reduce", "tangential IRKA reduction of the linear part");
    add_common(red);
    auto* cmp = app.add_subcommand("compare", "full vs reduced nonlinear simulation");
    add_common(cmp);
    cmp->add_option("--use-saved", saved_model, "replay a saved reduced_model.csv");
    auto* bench = app.add_subcommand("bench", "step-loop timing at several step sizes");
    add_common(bench);
    bench->add_option("--steps", steps, "comma-separated descending step sizes");

    CLI11_PARSE(app, argc, argv);

    try {
        const netmor::NetworkConfig cfg = netmor::parse_config(config_path);
        netmor::RunManifest manifest;
        if (sim->parsed()) {
            manifest = netmor::cmd_simulate(cfg, out_dir);
        } else if (red->parsed()) {
            manifest = netmor::cmd_reduce(cfg, out_dir);
        } else if (cmp->parsed()) {
            std::optional<std::filesystem::path> saved;
            if (!saved_model.empty()) saved = saved_model;
            manifest = netmor::cmd_compare(cfg, out_dir, saved);
        } else if (bench->parsed()) {
            manifest = netmor::cmd_bench(cfg, parse_steps(steps), out_dir);
        }
        if (!manifest.reduction_converged) {
            std::cerr << "warning: reduction did not reach tolerance; artifacts written\n";
            return 4;
        }
        return 0;
    } catch (const netmor::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const netmor::ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const netmor::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
