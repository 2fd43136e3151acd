#pragma once

// Report and table serialization: comparison reports as CSV/JSON, value and
// feedback tables as raw binaries with a JSON header, per-path CSV dumps.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "adc/filter.hpp"
#include "adc/grid.hpp"
#include "adc/montecarlo.hpp"
#include "adc/simulate.hpp"

namespace adc {

inline const char* sweep_variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::state_y: return "state_y";
        case SweepVariable::cond_variance: return "cond_variance";
        case SweepVariable::cond_mean: return "cond_mean";
    }
    return "?";
}

inline SweepVariable sweep_variable_from_name(const std::string& s) {
    if (s == "state_y") return SweepVariable::state_y;
    if (s == "cond_variance") return SweepVariable::cond_variance;
    if (s == "cond_mean") return SweepVariable::cond_mean;
    throw std::invalid_argument("unknown sweep variable: " + s);
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string report_to_csv(const ComparisonReport& rep) {
    std::ostringstream out;
    out << "abscissa";
    for (const auto& n : rep.policy_names) out << ',' << n << ',' << n << "_se";
    out << '\n';
    for (const auto& pt : rep.points) {
        out << detail::fmt_double(pt.abscissa);
        for (std::size_t i = 0; i < pt.mean.size(); ++i)
            out << ',' << detail::fmt_double(pt.mean[i]) << ','
                << detail::fmt_double(pt.stderr_[i]);
        out << '\n';
    }
    return out.str();
}

inline nlohmann::json report_to_json(const ComparisonReport& rep, std::uint64_t config_hash,
                                     const std::string& version) {
    nlohmann::json j;
    j["sweep_variable"] = sweep_variable_name(rep.variable);
    j["policies"] = rep.policy_names;
    j["seed"] = rep.seed;
    j["n_paths"] = rep.n_paths;
    j["config_hash"] = config_hash;
    j["version"] = version;
    auto& pts = j["points"] = nlohmann::json::array();
    for (const auto& pt : rep.points) {
        nlohmann::json row;
        row["abscissa"] = pt.abscissa;
        row["mean"] = pt.mean;
        row["stderr"] = pt.stderr_;
        pts.push_back(std::move(row));
    }
    return j;
}

inline ComparisonReport report_from_json(const nlohmann::json& j) {
    ComparisonReport rep;
    rep.variable = sweep_variable_from_name(j.at("sweep_variable").get<std::string>());
    rep.policy_names = j.at("policies").get<std::vector<std::string>>();
    rep.seed = j.at("seed").get<std::uint64_t>();
    rep.n_paths = j.at("n_paths").get<long>();
    for (const auto& row : j.at("points")) {
        SweepPoint pt;
        pt.abscissa = row.at("abscissa").get<double>();
        pt.mean = row.at("mean").get<std::vector<double>>();
        pt.stderr_ = row.at("stderr").get<std::vector<double>>();
        rep.points.push_back(std::move(pt));
    }
    return rep;
}

enum class ReportFormat { csv, json };

inline void emit_report(const ComparisonReport& rep, ReportFormat format,
                        const std::string& path, std::uint64_t config_hash = 0,
                        const std::string& version = "0.1.0") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_report: cannot open " + path);
    if (format == ReportFormat::csv) {
        out << report_to_csv(rep);
    } else {
        out << report_to_json(rep, config_hash, version).dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("emit_report: write failed for " + path);
}

// Per-path CSV: t, a, upsilon, gamma, u, G, var, cum_cost (m = 1).
inline std::string path_to_csv(const Prior& prior, const PathRecord& rec) {
    std::ostringstream out;
    out << "t,a,upsilon,gamma,u,G,var,cum_cost\n";
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
        const double g = posterior_mean_m1(prior, rec.upsilon[k], rec.gamma[k]);
        const double v = posterior_variance_m1(prior, rec.upsilon[k], rec.gamma[k]);
        out << detail::fmt_double(rec.times[k]) << ',' << detail::fmt_double(rec.a[k]) << ','
            << detail::fmt_double(rec.upsilon[k]) << ',' << detail::fmt_double(rec.gamma[k])
            << ',' << detail::fmt_double(rec.controls[k]) << ',' << detail::fmt_double(g) << ','
            << detail::fmt_double(v) << ',' << detail::fmt_double(rec.cum_cost[k]) << '\n';
    }
    return out.str();
}

inline nlohmann::json grid_to_json(const GridSpec& g) {
    nlohmann::json j;
    j["n_dyadic"] = g.n_dyadic;
    j["a"] = {g.a_axis.lo, g.a_axis.hi, g.a_axis.count};
    j["upsilon"] = {g.ups_axis.lo, g.ups_axis.hi, g.ups_axis.count};
    j["gamma"] = {g.gamma_axis.lo, g.gamma_axis.hi, g.gamma_axis.count};
    j["quad_nodes"] = g.quad_nodes;
    j["substeps"] = g.substeps;
    j["noise_rule"] = g.noise_rule == NoiseRule::lattice ? "lattice" : "gauss-hermite";
    return j;
}

inline GridSpec grid_from_header_json(const nlohmann::json& j) {
    GridSpec g;
    g.n_dyadic = j.at("n_dyadic").get<int>();
    const auto ax = [&](const char* k) {
        const auto& a = j.at(k);
        return Axis{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<int>()};
    };
    g.a_axis = ax("a");
    g.ups_axis = ax("upsilon");
    g.gamma_axis = ax("gamma");
    g.quad_nodes = j.at("quad_nodes").get<int>();
    g.substeps = j.at("substeps").get<int>();
    g.noise_rule = j.at("noise_rule").get<std::string>() == "lattice"
                       ? NoiseRule::lattice
                       : NoiseRule::gauss_hermite;
    return g;
}

namespace detail {

template <typename T>
void write_binary(const std::string& path, const std::vector<std::vector<T>>& slices) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (const auto& s : slices)
        out.write(reinterpret_cast<const char*>(s.data()),
                  static_cast<std::streamsize>(s.size() * sizeof(T)));
    if (!out) throw std::runtime_error("write failed for " + path);
}

template <typename T>
std::vector<std::vector<T>> read_binary(const std::string& path, std::size_t n_slices,
                                        std::size_t slice_len) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<T>> slices(n_slices);
    for (auto& s : slices) {
        s.resize(slice_len);
        in.read(reinterpret_cast<char*>(s.data()),
                static_cast<std::streamsize>(slice_len * sizeof(T)));
        if (!in) throw std::runtime_error("truncated table file: " + path);
    }
    return slices;
}

}  // namespace detail

// Writes header.json, value.bin (doubles) and feedback.bin (uint16 control
// indices) into dir.
inline void save_tables(const std::string& dir, const ValueTable& vt, const FeedbackTable& ft,
                        std::uint64_t config_hash, const std::string& version = "0.1.0") {
    nlohmann::json h;
    h["grid"] = grid_to_json(vt.grid);
    h["horizon"] = vt.horizon;
    h["gamma_capped"] = vt.gamma_capped;
    h["controls"] = ft.controls;
    h["config_hash"] = config_hash;
    h["version"] = version;
    std::ofstream out(dir + "/header.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + dir + "/header.json");
    out << h.dump(2) << '\n';
    detail::write_binary(dir + "/value.bin", vt.slices);
    detail::write_binary(dir + "/feedback.bin", ft.slices);
}

inline std::pair<ValueTable, FeedbackTable> load_tables(const std::string& dir) {
    std::ifstream in(dir + "/header.json");
    if (!in) throw std::runtime_error("cannot open " + dir + "/header.json");
    nlohmann::json h = nlohmann::json::parse(in);
    ValueTable vt;
    vt.grid = grid_from_header_json(h.at("grid"));
    vt.horizon = h.at("horizon").get<double>();
    vt.gamma_capped = h.value("gamma_capped", false);
    FeedbackTable ft;
    ft.grid = vt.grid;
    ft.horizon = vt.horizon;
    ft.controls = h.at("controls").get<std::vector<double>>();
    const std::size_t npts = vt.grid.points();
    const std::size_t steps = static_cast<std::size_t>(vt.grid.time_steps());
    vt.slices = detail::read_binary<double>(dir + "/value.bin", steps + 1, npts);
    ft.slices = detail::read_binary<std::uint16_t>(dir + "/feedback.bin", steps, npts);
    return {std::move(vt), std::move(ft)};
}

}  // namespace adc
