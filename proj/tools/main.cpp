// twindeph command-line front end: flag wiring and exit-code mapping only,
// the subcommand logic lives in twindeph/cli.hpp.

#include "twindeph/cli.hpp"
#include "twindeph/schedule.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Two-photon dephasing toolkit: trajectories, offset sweeps, fits, synthetic counting"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string input_path;
    std::uint64_t seed = 0;
    double step = 1.0;
    double offset = twindeph::schedule::kArmMax;
    double split = twindeph::schedule::kArmMax;

    const auto add_config_flags = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out_path, "output CSV path");
        sub->add_option("--step", step, "sampling step in lambda0 units");
        sub->add_option("--offset", offset, "schedule offset in lambda0 units");
    };

    CLI::App* sim = app.add_subcommand("simulate", "noiseless trace-distance trajectory");
    add_config_flags(sim);
    CLI::App* sweep = app.add_subcommand("sweep", "one trajectory per schedule offset");
    add_config_flags(sweep);
    CLI::App* synth = app.add_subcommand("synth", "synthetic counting run plus recovered fit");
    add_config_flags(synth);

    CLI::App* fit = app.add_subcommand("fit", "two-stage fit of a trajectory CSV");
    fit->add_option("input", input_path, "trajectory CSV")->required();
    fit->add_option("--split", split, "branch split point in lambda0 units");
    fit->add_option("--out", out_path, "output JSON path");

    CLI::App* nonmarkov = app.add_subcommand("nonmarkov", "accumulated trace-distance rise of a CSV");
    nonmarkov->add_option("input", input_path, "trajectory CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto configured = [&](CLI::App* sub) {
            auto cfg = twindeph::cli::load_config(config_path);
            if (sub->count("--seed")) cfg.seed = seed;
            if (sub->count("--step")) cfg.step = step;
            if (sub->count("--offset")) cfg.offset = offset;
            if (sub->count("--out")) cfg.out_csv = out_path;
            return cfg;
        };
        if (app.got_subcommand(sim)) {
            twindeph::cli::cmd_simulate(configured(sim), std::cout, std::cerr);
        } else if (app.got_subcommand(sweep)) {
            twindeph::cli::cmd_sweep(configured(sweep), std::cout, std::cerr);
        } else if (app.got_subcommand(synth)) {
            twindeph::cli::cmd_synth(configured(synth), std::cout);
        } else if (app.got_subcommand(fit)) {
            twindeph::cli::cmd_fit(input_path, split, out_path, std::cout);
        } else {
            twindeph::cli::cmd_nonmarkov(input_path, std::cout);
        }
    } catch (const twindeph::cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const twindeph::io::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
