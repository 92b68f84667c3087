#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "acs3/experiments.hpp"

// Exit codes: 0 success, 2 configuration problem, 1 numerical failure.

int main(int argc, char** argv) {
    CLI::App app{"Allen-Cahn gradient flow laboratory on the round three-sphere"};
    app.require_subcommand(1);

    std::string config_path, out_override, inspect_path;
    int threads = 0;
    app.add_option("--config", config_path, "key=value configuration file");
    app.add_option("--out", out_override, "output directory (overrides config)");
    app.add_option("--threads", threads, "worker threads (overrides config)");
    app.fallthrough(true);

    auto* sc_stationary =
        app.add_subcommand("stationary", "solve the torus-symmetric and equatorial profiles");
    auto* sc_spectrum =
        app.add_subcommand("spectrum", "linearized mode spectra and Morse indices");
    auto* sc_flow = app.add_subcommand("flow", "one gradient-flow run from the unstable cone");
    auto* sc_sweep =
        app.add_subcommand("sweep", "bisect the heteroclinic threshold along an unstable arc");
    auto* sc_orbit =
        app.add_subcommand("orbit", "equivariance scan over a grid of rotated directions");
    auto* sc_toy = app.add_subcommand("toy", "product-manifold toy model diagnostics");
    auto* sc_inspect = app.add_subcommand("inspect", "print a snapshot file's diagnostics");
    sc_inspect->add_option("snapshot", inspect_path, "snapshot .bin path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        acs3::Config cfg =
            config_path.empty() ? acs3::Config{} : acs3::load_config(config_path);
        if (!out_override.empty()) cfg.set("out", out_override);
        if (threads > 0) cfg.set("threads", std::to_string(threads));
        if (sc_stationary->parsed()) return acs3::cmd_stationary(cfg);
        if (sc_spectrum->parsed()) return acs3::cmd_spectrum(cfg);
        if (sc_flow->parsed()) return acs3::cmd_flow(cfg);
        if (sc_sweep->parsed()) return acs3::cmd_sweep(cfg);
        if (sc_orbit->parsed()) return acs3::cmd_orbit(cfg);
        if (sc_toy->parsed()) return acs3::cmd_toy(cfg);
        if (sc_inspect->parsed()) return acs3::cmd_inspect(inspect_path, std::cout);
    } catch (const acs3::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const acs3::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
