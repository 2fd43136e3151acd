#pragma once

// One JSON document with sections {prior, model, grid, simulate, compare}.
// A --seed flag overrides the config seed; outputs embed the config hash.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "adc/grid.hpp"
#include "adc/model.hpp"
#include "adc/montecarlo.hpp"
#include "adc/prior.hpp"
#include "adc/riccati.hpp"

namespace adc {

using Json = nlohmann::json;

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline Prior prior_from_json(const Json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "discrete") {
        std::vector<std::pair<double, double>> atoms;
        for (const auto& a : j.at("atoms"))
            atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
        return Prior::discrete(atoms);
    }
    if (type == "uniform") {
        return Prior::uniform(j.at("lo").get<double>(), j.at("hi").get<double>(),
                              j.value("nodes", 64));
    }
    throw std::invalid_argument("prior_from_json: unknown prior type '" + type + "'");
}

inline WindTunnelParams wind_tunnel_params_from_json(const Json& j) {
    WindTunnelParams p;
    p.sigma0 = j.value("sigma0", p.sigma0);
    p.T = j.value("T", p.T);
    p.rho = j.value("rho", p.rho);
    p.c = j.value("c", p.c);
    p.C = j.value("C", p.C);
    p.u_max = j.value("u_max", p.u_max);
    p.n_controls = j.value("n_controls", p.n_controls);
    return p;
}

// Generic composition from polynomial coefficients: b = sum c y^p u^q,
// constant sigma, k = ky y^2 + ku u^2, g = cg y^2.
inline Model polynomial_model_from_json(const Json& j) {
    struct Term {
        double coef;
        int ypow, upow;
    };
    std::vector<Term> terms;
    for (const auto& t : j.at("b"))
        terms.push_back({t.at(0).get<double>(), t.at(1).get<int>(), t.at(2).get<int>()});
    Model m;
    m.dim = 1;
    m.horizon = j.value("T", 1.0);
    const double sigma0 = j.value("sigma0", 1.0);
    m.drift_basis = [terms](double, double y, double u, std::span<double> out) {
        double acc = 0.0;
        for (const auto& t : terms) {
            double v = t.coef;
            for (int i = 0; i < t.ypow; ++i) v *= y;
            for (int i = 0; i < t.upow; ++i) v *= u;
            acc += v;
        }
        out[0] = acc;
    };
    m.noise = [sigma0](double, double, double) { return sigma0; };
    const double ky = j.value("k_y2", 1.0), ku = j.value("k_u2", 1.0);
    const double cg = j.value("g_y2", 1.0);
    m.running_cost = [ky, ku](double, double y, double u, std::span<const double>) {
        return ky * y * y + ku * u * u;
    };
    m.terminal_cost = [cg](double y, std::span<const double>) { return cg * y * y; };
    m.running_cost_uses_lambda = false;
    m.terminal_cost_uses_lambda = false;
    m.control_min = -j.value("u_max", 1.0);
    m.control_max = j.value("u_max", 1.0);
    m.n_controls = j.value("n_controls", 41);
    return m;
}

inline Model model_from_json(const Json& j) {
    const std::string name = j.value("model", "wind-tunnel");
    if (name == "wind-tunnel") return wind_tunnel(wind_tunnel_params_from_json(j));
    if (name == "polynomial") return polynomial_model_from_json(j);
    throw std::invalid_argument("model_from_json: unknown model '" + name + "'");
}

inline LQParams lq_params_from_json(const Json& j) {
    LQParams p;
    p.sigma0 = j.value("sigma0", p.sigma0);
    p.T = j.value("T", p.T);
    p.rho = j.value("rho", p.rho);
    p.c = j.value("c", p.c);
    p.C = j.value("C", p.C);
    return p;
}

inline RiccatiDenominator riccati_denominator_from_json(const Json& j) {
    const std::string d = j.value("riccati_denominator", "rho");
    if (d == "rho") return RiccatiDenominator::rho;
    if (d == "rho_squared") return RiccatiDenominator::rho_squared;
    throw std::invalid_argument("riccati_denominator must be 'rho' or 'rho_squared'");
}

inline Axis axis_from_json(const Json& j) {
    return Axis{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<int>()};
}

inline GridSpec grid_from_json(const Json& j) {
    GridSpec g;
    g.n_dyadic = j.value("n_dyadic", g.n_dyadic);
    if (j.contains("a")) g.a_axis = axis_from_json(j.at("a"));
    if (j.contains("upsilon")) g.ups_axis = axis_from_json(j.at("upsilon"));
    if (j.contains("gamma")) g.gamma_axis = axis_from_json(j.at("gamma"));
    g.quad_nodes = j.value("quad_nodes", g.quad_nodes);
    g.substeps = j.value("substeps", g.substeps);
    const std::string rule = j.value("noise_rule", "lattice");
    if (rule == "lattice")
        g.noise_rule = NoiseRule::lattice;
    else if (rule == "gauss-hermite")
        g.noise_rule = NoiseRule::gauss_hermite;
    else
        throw std::invalid_argument("noise_rule must be 'lattice' or 'gauss-hermite'");
    g.validate();
    return g;
}

struct AppConfig {
    Json raw;
    std::uint64_t hash = 0;
    std::uint64_t seed = 0;

    Prior prior() const { return prior_from_json(raw.at("prior")); }
    Model model() const { return model_from_json(raw.value("model", Json::object())); }
    LQParams lq() const { return lq_params_from_json(raw.value("model", Json::object())); }
    RiccatiDenominator riccati_denominator() const {
        return riccati_denominator_from_json(raw.value("model", Json::object()));
    }
    GridSpec grid() const { return grid_from_json(raw.value("grid", Json::object())); }
    Json simulate_section() const { return raw.value("simulate", Json::object()); }
    Json compare_section() const { return raw.value("compare", Json::object()); }
};

inline AppConfig load_config_text(const std::string& text) {
    AppConfig cfg;
    cfg.raw = Json::parse(text);
    cfg.hash = fnv1a64(cfg.raw.dump());
    cfg.seed = cfg.raw.value("seed", 0ULL);
    return cfg;
}

inline AppConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_config_text(ss.str());
}

}  // namespace adc
