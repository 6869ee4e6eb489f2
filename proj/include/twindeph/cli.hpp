// cli.hpp — Run configuration and subcommand implementations
//
// The config file is one JSON document per run. Unknown fields are rejected
// rather than ignored, and parse errors carry line numbers. Command-line
// flags override file fields; wiring of flags to fields lives in the binary,
// the work happens here so tests can drive subcommands in-process.
//
// Error taxonomy: ConfigError (and io::ParseError, std::invalid_argument) are
// usage problems, exit code 2; everything else that escapes is a runtime
// failure, exit code 1.

#pragma once

#include "twindeph/analysis.hpp"
#include "twindeph/channel.hpp"
#include "twindeph/fit.hpp"
#include "twindeph/io.hpp"
#include "twindeph/schedule.hpp"
#include "twindeph/spectra.hpp"
#include "twindeph/synth.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twindeph::cli {

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    double amplitude{1.0};  // visibility scale applied to simulated D values
    std::optional<spectra::GaussianJointSpectrum> model;
    std::string grid_csv;  // sampled environment; exactly one of model/grid_csv
    double offset{schedule::kArmMax};
    double step{1.0};
    std::uint64_t seed{1};
    std::vector<double> offsets;  // sweep family; empty means {0, 75, 100, 150, 199}
    double total_expected{0.0};   // counting plan for synth
    std::vector<double> points;
    std::string out_csv;
    std::string out_json;

    void validate() const {
        if (model.has_value() == !grid_csv.empty()) {
            throw ConfigError("config: exactly one of 'model' and 'grid_csv' must be given");
        }
        if (!(amplitude > 0.0 && amplitude <= 1.0)) {
            throw ConfigError("config: model.a must lie in (0, 1]");
        }
        if (!(offset >= 0.0 && offset <= schedule::kArmMax)) {
            throw ConfigError("config: offset must lie in [0, 199]");
        }
        if (!(step > 0.0)) throw ConfigError("config: step must be > 0");
        for (const double o : offsets) {
            if (!(o >= 0.0 && o <= schedule::kArmMax)) {
                throw ConfigError("config: offsets entries must lie in [0, 199]");
            }
        }
    }
};

inline const std::vector<double> kDefaultSweepOffsets{0.0, 75.0, 100.0, 150.0,
                                                     schedule::kArmMax};

// ----------------------------- Config loading --------------------------------

namespace detail {

inline std::size_t line_of_byte(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

inline void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* name : allowed) {
            if (key == name) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ConfigError(where + ": unknown field '" + key + "'");
    }
}

inline double number_field(const nlohmann::json& obj, const char* key, double fallback,
                           const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
    return obj[key].get<double>();
}

inline std::vector<double> number_array(const nlohmann::json& arr, const std::string& where) {
    if (!arr.is_array()) throw ConfigError(where + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : arr) {
        if (!v.is_number()) throw ConfigError(where + " must contain numbers only");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j, const std::string& source) {
    if (!j.is_object()) throw ConfigError(source + ": config must be a JSON object");
    detail::check_keys(j,
                       {"model", "grid_csv", "offset", "step", "seed", "offsets", "counting",
                        "out_csv", "out_json"},
                       source);
    RunConfig cfg;
    if (j.contains("model")) {
        const auto& m = j["model"];
        if (!m.is_object()) throw ConfigError(source + ": 'model' must be an object");
        detail::check_keys(m, {"a", "u", "b", "k", "m1", "m2"}, source + ": model");
        if (m.contains("u") == m.contains("b")) {
            throw ConfigError(source + ": model needs exactly one of 'u' and 'b'");
        }
        cfg.amplitude = detail::number_field(m, "a", 1.0, source);
        spectra::GaussianJointSpectrum spec;
        spec.m1 = detail::number_field(m, "m1", 0.0, source);
        spec.m2 = detail::number_field(m, "m2", 0.0, source);
        spec.k = detail::number_field(m, "k", 0.0, source);
        if (m.contains("u")) {
            const double u = detail::number_field(m, "u", 0.0, source);
            if (!(u >= 0.0)) throw ConfigError(source + ": model.u must be >= 0");
            spec.b = u / (schedule::kArmMax * schedule::kArmMax);
        } else {
            spec.b = detail::number_field(m, "b", 0.0, source);
        }
        try {
            spec.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(source + ": " + e.what());
        }
        cfg.model = spec;
    }
    if (j.contains("grid_csv")) {
        if (!j["grid_csv"].is_string()) throw ConfigError(source + ": 'grid_csv' must be a string");
        cfg.grid_csv = j["grid_csv"].get<std::string>();
    }
    cfg.offset = detail::number_field(j, "offset", cfg.offset, source);
    cfg.step = detail::number_field(j, "step", cfg.step, source);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) {
            throw ConfigError(source + ": 'seed' must be a non-negative integer");
        }
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("offsets")) cfg.offsets = detail::number_array(j["offsets"], source + ": 'offsets'");
    if (j.contains("counting")) {
        const auto& c = j["counting"];
        if (!c.is_object()) throw ConfigError(source + ": 'counting' must be an object");
        detail::check_keys(c, {"total_expected", "points"}, source + ": counting");
        cfg.total_expected = detail::number_field(c, "total_expected", 0.0, source);
        if (c.contains("points")) {
            cfg.points = detail::number_array(c["points"], source + ": counting.points");
        }
    }
    if (j.contains("out_csv")) {
        if (!j["out_csv"].is_string()) throw ConfigError(source + ": 'out_csv' must be a string");
        cfg.out_csv = j["out_csv"].get<std::string>();
    }
    if (j.contains("out_json")) {
        if (!j["out_json"].is_string()) throw ConfigError(source + ": 'out_json' must be a string");
        cfg.out_json = j["out_json"].get<std::string>();
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    const std::string text((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ":" + std::to_string(detail::line_of_byte(text, e.byte)) + ": " +
                          e.what());
    }
    return parse_config(j, path);
}

// ----------------------------- Environment -----------------------------------

namespace detail {

struct Environment {
    std::optional<spectra::GaussianJointSpectrum> spec;
    std::optional<spectra::AmplitudeGrid> grid;
};

inline Environment load_environment(const RunConfig& cfg, std::ostream& warn) {
    Environment env;
    if (cfg.model) {
        env.spec = *cfg.model;
    } else {
        env.grid = io::read_grid_csv(cfg.grid_csv);
        if (spectra::aliasing_risk(*env.grid, schedule::kArmMax, schedule::kArmMax)) {
            warn << "warning: " << cfg.grid_csv
                 << ": grid spacing exceeds pi/199 per step; phases alias at large x and "
                    "decoherence values are unreliable\n";
        }
    }
    return env;
}

inline analysis::TraceDistanceTrajectory env_trajectory(const Environment& env,
                                                        const schedule::PlateSchedule& sched,
                                                        double step, double amplitude) {
    auto traj = env.spec ? schedule::trajectory(*env.spec, sched, step)
                         : schedule::trajectory(*env.grid, sched, step);
    for (auto& p : traj.points) p.d *= amplitude;
    return traj;
}

inline std::string derived_json_path(const std::string& csv_path) {
    const auto dot = csv_path.rfind('.');
    const auto slash = csv_path.find_last_of("/\\");
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    return (has_ext ? csv_path.substr(0, dot) : csv_path) + ".fit.json";
}

}  // namespace detail

// ----------------------------- Subcommands -----------------------------------

// Noiseless trajectory for one offset; CSV to out_csv, summary JSON to status.
inline void cmd_simulate(const RunConfig& cfg, std::ostream& status, std::ostream& warn) {
    cfg.validate();
    if (cfg.out_csv.empty()) throw ConfigError("simulate: output CSV path required (--out)");
    const auto env = detail::load_environment(cfg, warn);
    const auto traj =
        detail::env_trajectory(env, schedule::PlateSchedule{cfg.offset}, cfg.step, cfg.amplitude);
    auto out = io::open_output(cfg.out_csv);
    io::write_trajectory_csv(out, traj);
    const nlohmann::json summary{{"n", analysis::blp_measure(traj)},
                                 {"d_final", traj.points.back().d}};
    status << summary.dump() << '\n';
}

// Two-stage fit of an existing trajectory CSV; FitResult JSON to out_json.
inline void cmd_fit(const std::string& input_csv, double split, const std::string& out_json,
                    std::ostream& status) {
    if (out_json.empty()) throw ConfigError("fit: output JSON path required (--out)");
    const auto traj = io::read_trajectory_csv(input_csv);
    const auto fit = analysis::fit_consecutive(traj, split);
    auto out = io::open_output(out_json);
    out << io::fit_result_to_json(fit).dump(2) << '\n';
    nlohmann::json summary{{"k", fit.k}};
    summary["k_err"] = fit.k_err >= 0.0 ? nlohmann::json(fit.k_err) : nlohmann::json(nullptr);
    status << summary.dump() << '\n';
}

// One trajectory per offset in long-format CSV, plus an N-per-offset table.
inline void cmd_sweep(const RunConfig& cfg, std::ostream& status, std::ostream& warn) {
    cfg.validate();
    if (cfg.out_csv.empty()) throw ConfigError("sweep: output CSV path required (--out)");
    const auto& offsets = cfg.offsets.empty() ? kDefaultSweepOffsets : cfg.offsets;
    const auto env = detail::load_environment(cfg, warn);
    std::vector<std::pair<double, analysis::TraceDistanceTrajectory>> family;
    nlohmann::json table = nlohmann::json::array();
    for (const double o : offsets) {
        auto traj = detail::env_trajectory(env, schedule::PlateSchedule{o}, cfg.step,
                                           cfg.amplitude);
        table.push_back({{"offset", o},
                         {"n", analysis::blp_measure(traj)},
                         {"d_final", traj.points.back().d}});
        family.emplace_back(o, std::move(traj));
    }
    auto out = io::open_output(cfg.out_csv);
    io::write_sweep_csv(out, family);
    status << nlohmann::json{{"table", std::move(table)}}.dump() << '\n';
}

// Synthetic counting run plus the recovered fit. A degenerate fit is not a
// failure: the flag rides in the JSON and the exit stays 0.
inline void cmd_synth(const RunConfig& cfg, std::ostream& status) {
    cfg.validate();
    if (!cfg.model) throw ConfigError("synth: requires a parametric model");
    if (!(cfg.total_expected > 0.0)) {
        throw ConfigError("synth: counting.total_expected must be > 0");
    }
    if (cfg.points.empty()) throw ConfigError("synth: counting.points must be non-empty");
    if (cfg.out_csv.empty()) throw ConfigError("synth: output CSV path required (--out)");
    const std::string json_path =
        cfg.out_json.empty() ? detail::derived_json_path(cfg.out_csv) : cfg.out_json;

    const auto traj = synth::synth_experiment(*cfg.model, schedule::PlateSchedule{cfg.offset},
                                              cfg.points, cfg.total_expected, cfg.seed);
    auto out = io::open_output(cfg.out_csv);
    io::write_trajectory_csv(out, traj);

    analysis::FitResult fit;
    try {
        fit = analysis::fit_consecutive(traj);
    } catch (const analysis::FitError& e) {
        if (!e.partial.degenerate) throw;
        fit = e.partial;
    }
    auto jout = io::open_output(json_path);
    jout << io::fit_result_to_json(fit).dump(2) << '\n';
    nlohmann::json summary;
    summary["k"] = std::isnan(fit.k) ? nlohmann::json(nullptr) : nlohmann::json(fit.k);
    summary["k_err"] = fit.k_err >= 0.0 ? nlohmann::json(fit.k_err) : nlohmann::json(nullptr);
    summary["degenerate"] = fit.degenerate;
    status << summary.dump() << '\n';
}

// N from an existing trajectory CSV.
inline void cmd_nonmarkov(const std::string& input_csv, std::ostream& status) {
    const auto traj = io::read_trajectory_csv(input_csv);
    status << nlohmann::json{{"n", analysis::blp_measure(traj)}}.dump() << '\n';
}

}  // namespace twindeph::cli
