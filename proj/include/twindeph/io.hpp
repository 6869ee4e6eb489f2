// io.hpp — CSV and JSON serialization for trajectories, grids, and fits
//
// All numeric text is shortest round-trip (std::to_chars), UTF-8, '.' decimal
// separator, header row required on every CSV. Readers are strict: wrong
// header, short row, or non-numeric cell raises ParseError naming the row.

#pragma once

#include "twindeph/analysis.hpp"
#include "twindeph/channel.hpp"
#include "twindeph/fit.hpp"
#include "twindeph/spectra.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace twindeph::io {

class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
    std::array<char, 32> buf;
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

namespace detail {

inline double parse_double(std::string_view cell, const std::string& source, std::size_t row) {
    double v{};
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || end != cell.data() + cell.size()) {
        throw ParseError(source + ": row " + std::to_string(row) + ": bad number '" +
                         std::string(cell) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

// strips a trailing '\r' so CRLF files parse
inline std::string_view trim_line(const std::string& line) {
    std::string_view v{line};
    if (!v.empty() && v.back() == '\r') v.remove_suffix(1);
    return v;
}

}  // namespace detail

// ----------------------------- Trajectory CSV --------------------------------

inline void write_trajectory_csv(std::ostream& out, const analysis::TraceDistanceTrajectory& traj) {
    const bool sigma = traj.has_sigma();
    out << (sigma ? "x_lambda0,D,d_err\n" : "x_lambda0,D\n");
    for (const auto& p : traj.points) {
        out << format_double(p.x) << ',' << format_double(p.d);
        if (sigma) out << ',' << format_double(p.sigma);
        out << '\n';
    }
}

inline analysis::TraceDistanceTrajectory read_trajectory_csv(std::istream& in,
                                                             const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(source + ": empty file");
    const auto header = detail::trim_line(line);
    bool sigma = false;
    if (header == "x_lambda0,D,d_err") {
        sigma = true;
    } else if (header != "x_lambda0,D") {
        throw ParseError(source + ": row 1: expected header 'x_lambda0,D[,d_err]', got '" +
                         std::string(header) + "'");
    }
    analysis::TraceDistanceTrajectory traj;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const auto v = detail::trim_line(line);
        if (v.empty()) continue;
        const auto cells = detail::split_row(v);
        if (cells.size() != (sigma ? 3u : 2u)) {
            throw ParseError(source + ": row " + std::to_string(row) + ": expected " +
                             (sigma ? "3" : "2") + " columns, got " +
                             std::to_string(cells.size()));
        }
        analysis::TraceDistanceTrajectory::Point p;
        p.x = detail::parse_double(cells[0], source, row);
        p.d = detail::parse_double(cells[1], source, row);
        if (sigma) p.sigma = detail::parse_double(cells[2], source, row);
        traj.points.push_back(p);
    }
    try {
        traj.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(source + ": " + e.what());
    }
    return traj;
}

// ----------------------------- Sweep CSV -------------------------------------

inline void write_sweep_csv(
    std::ostream& out,
    const std::vector<std::pair<double, analysis::TraceDistanceTrajectory>>& family) {
    out << "offset,x_lambda0,D\n";
    for (const auto& [offset, traj] : family) {
        for (const auto& p : traj.points) {
            out << format_double(offset) << ',' << format_double(p.x) << ','
                << format_double(p.d) << '\n';
        }
    }
}

// ----------------------------- Grid CSV --------------------------------------

inline void write_grid_csv(std::ostream& out, const spectra::AmplitudeGrid& grid) {
    out << "omega1,omega2,re_g,im_g\n";
    const auto& ax1 = grid.axis1();
    const auto& ax2 = grid.axis2();
    const auto& g = grid.amplitudes();
    for (Eigen::Index i = 0; i < ax1.size(); ++i) {
        for (Eigen::Index j = 0; j < ax2.size(); ++j) {
            out << format_double(ax1[i]) << ',' << format_double(ax2[j]) << ','
                << format_double(g(i, j).real()) << ',' << format_double(g(i, j).imag()) << '\n';
        }
    }
}

// Rebuilds the rectangular grid from one row per cell. Every (omega1, omega2)
// combination must appear exactly once; amplitudes are renormalized on load.
inline spectra::AmplitudeGrid read_grid_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(source + ": empty file");
    if (detail::trim_line(line) != "omega1,omega2,re_g,im_g") {
        throw ParseError(source + ": row 1: expected header 'omega1,omega2,re_g,im_g'");
    }
    struct Row {
        double w1, w2;
        spectra::Complex g;
    };
    std::vector<Row> rows;
    std::set<double> axis1_vals, axis2_vals;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const auto v = detail::trim_line(line);
        if (v.empty()) continue;
        const auto cells = detail::split_row(v);
        if (cells.size() != 4) {
            throw ParseError(source + ": row " + std::to_string(row) + ": expected 4 columns");
        }
        Row r;
        r.w1 = detail::parse_double(cells[0], source, row);
        r.w2 = detail::parse_double(cells[1], source, row);
        r.g = {detail::parse_double(cells[2], source, row),
               detail::parse_double(cells[3], source, row)};
        axis1_vals.insert(r.w1);
        axis2_vals.insert(r.w2);
        rows.push_back(r);
    }
    const Eigen::Index n1 = static_cast<Eigen::Index>(axis1_vals.size());
    const Eigen::Index n2 = static_cast<Eigen::Index>(axis2_vals.size());
    if (static_cast<Eigen::Index>(rows.size()) != n1 * n2) {
        throw ParseError(source + ": grid is not rectangular (" + std::to_string(rows.size()) +
                         " rows for " + std::to_string(n1) + "x" + std::to_string(n2) + " axes)");
    }
    Eigen::VectorXd ax1(n1), ax2(n2);
    std::map<double, Eigen::Index> idx1, idx2;
    Eigen::Index i = 0;
    for (const double w : axis1_vals) {
        idx1[w] = i;
        ax1[i++] = w;
    }
    i = 0;
    for (const double w : axis2_vals) {
        idx2[w] = i;
        ax2[i++] = w;
    }
    Eigen::MatrixXcd g(n1, n2);
    Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(n1, n2);
    for (const auto& r : rows) {
        const auto i1 = idx1[r.w1];
        const auto i2 = idx2[r.w2];
        if (seen(i1, i2)++) {
            throw ParseError(source + ": duplicate grid cell (" + format_double(r.w1) + ", " +
                             format_double(r.w2) + ")");
        }
        g(i1, i2) = r.g;
    }
    try {
        return spectra::AmplitudeGrid::from_amplitudes(std::move(ax1), std::move(ax2),
                                                       std::move(g));
    } catch (const std::invalid_argument& e) {
        throw ParseError(source + ": " + e.what());
    }
}

// ----------------------------- JSON ------------------------------------------

// 16 [re, im] pairs, row-major, basis order HH, HV, VH, VV.
inline nlohmann::json density_to_json(const channel::DensityMatrix4& rho) {
    nlohmann::json elements = nlohmann::json::array();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            elements.push_back({rho.m(i, j).real(), rho.m(i, j).imag()});
        }
    }
    return nlohmann::json{{"elements", std::move(elements)}};
}

inline channel::DensityMatrix4 density_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("elements") || !j["elements"].is_array() ||
        j["elements"].size() != 16) {
        throw ParseError("density matrix JSON: expected object with 16 'elements' pairs");
    }
    channel::DensityMatrix4 rho;
    for (int idx = 0; idx < 16; ++idx) {
        const auto& pair = j["elements"][idx];
        if (!pair.is_array() || pair.size() != 2) {
            throw ParseError("density matrix JSON: element " + std::to_string(idx) +
                             " is not a [re, im] pair");
        }
        rho.m(idx / 4, idx % 4) = {pair[0].get<double>(), pair[1].get<double>()};
    }
    return rho;
}

inline nlohmann::json fit_result_to_json(const analysis::FitResult& fit) {
    nlohmann::json j{{"a", fit.a},
                     {"b_per_lambda0_sq", fit.b},
                     {"rss", fit.rss},
                     {"n_points", fit.n_points},
                     {"degenerate_flag", fit.degenerate}};
    if (std::isnan(fit.k)) {
        j["k"] = nullptr;
    } else {
        j["k"] = fit.k;
    }
    return j;
}

inline analysis::FitResult fit_result_from_json(const nlohmann::json& j) {
    analysis::FitResult fit;
    try {
        fit.a = j.at("a").get<double>();
        fit.b = j.at("b_per_lambda0_sq").get<double>();
        fit.k = j.at("k").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                    : j.at("k").get<double>();
        fit.rss = j.at("rss").get<double>();
        fit.n_points = j.at("n_points").get<int>();
        fit.degenerate = j.at("degenerate_flag").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fit result JSON: ") + e.what());
    }
    return fit;
}

// ----------------------------- File helpers ----------------------------------

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open for reading");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    return out;
}

inline analysis::TraceDistanceTrajectory read_trajectory_csv(const std::string& path) {
    auto in = open_input(path);
    return read_trajectory_csv(in, path);
}

inline spectra::AmplitudeGrid read_grid_csv(const std::string& path) {
    auto in = open_input(path);
    return read_grid_csv(in, path);
}

}  // namespace twindeph::io
