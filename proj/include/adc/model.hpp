#pragma once

// Problem data: coefficients b, sigma and costs k, g with their constants,
// the compact control box and its uniform discretization, and the posterior
// cost transforms. A named preset registry covers the wind-tunnel benchmark;
// arbitrary coefficient closures are a library-level extension point.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adc/filter.hpp"
#include "adc/prior.hpp"
#include "adc/symvec.hpp"

namespace adc {

struct ModelBounds {
    double lipschitz = 1.0;    // L
    double magnitude = 1.0;    // M: |b| + |sigma| + |1/sigma| <= M
    double cost_growth = 1.0;  // C: |k| + |g| <= C (1 + |y|^p)
    double cost_power = 2.0;   // p
};

struct Model {
    int dim = 1;           // m
    double horizon = 1.0;  // T

    // b(t, y, u) written into out (size m)
    std::function<void(double, double, double, std::span<double>)> drift_basis;
    // sigma(t, y, u) > 0
    std::function<double(double, double, double)> noise;
    // k(t, y, u, ell) >= 0
    std::function<double(double, double, double, std::span<const double>)> running_cost;
    // g(y, ell) >= 0
    std::function<double(double, std::span<const double>)> terminal_cost;

    ModelBounds bounds;

    double control_min = -1.0;
    double control_max = 1.0;
    int n_controls = 41;

    // Skip the posterior sum when the costs do not read lambda.
    bool running_cost_uses_lambda = true;
    bool terminal_cost_uses_lambda = true;

    std::vector<double> control_grid() const {
        std::vector<double> u(n_controls);
        if (n_controls == 1) {
            u[0] = 0.5 * (control_min + control_max);
            return u;
        }
        const double du = (control_max - control_min) / (n_controls - 1);
        for (int i = 0; i < n_controls; ++i) u[i] = control_min + i * du;
        return u;
    }

    double clip_control(double u) const {
        return u < control_min ? control_min : (u > control_max ? control_max : u);
    }

    double drift1(double t, double y, double u) const {  // m == 1 convenience
        double b;
        drift_basis(t, y, u, std::span<double>(&b, 1));
        return b;
    }
};

struct WindTunnelParams {
    double sigma0 = 1.0;
    double T = 1.0;
    double rho = 2.0;
    double c = 2.0;
    double C = 5.0;
    double u_max = 4.0;
    int n_controls = 41;
};

// b = u, sigma = sigma0, k = c y^2 + rho u^2, g = C y^2.
inline Model wind_tunnel(const WindTunnelParams& p = {}) {
    if (!(p.sigma0 > 0.0 && p.T > 0.0 && p.rho > 0.0 && p.c > 0.0 && p.C > 0.0))
        throw std::invalid_argument("wind_tunnel: parameters must be strictly positive");
    Model m;
    m.dim = 1;
    m.horizon = p.T;
    m.drift_basis = [](double, double, double u, std::span<double> out) { out[0] = u; };
    m.noise = [s = p.sigma0](double, double, double) { return s; };
    m.running_cost = [c = p.c, rho = p.rho](double, double y, double u, std::span<const double>) {
        return c * y * y + rho * u * u;
    };
    m.terminal_cost = [C = p.C](double y, std::span<const double>) { return C * y * y; };
    m.running_cost_uses_lambda = false;
    m.terminal_cost_uses_lambda = false;
    m.control_min = -p.u_max;
    m.control_max = p.u_max;
    m.n_controls = p.n_controls;
    const double umax = std::max(std::abs(p.u_max), 1.0);
    m.bounds = ModelBounds{0.0, umax + p.sigma0 + 1.0 / p.sigma0,
                           std::max(p.C, std::max(p.c, p.rho * p.u_max * p.u_max)), 2.0};
    return m;
}

// k~ = F[k(t,y,u,.)]/F and g~ = F[g(y,.)]/F.
struct TransformedCosts {
    double running;   // k~
    double terminal;  // g~
};

inline TransformedCosts transformed_costs(const Model& model, const Prior& prior, double t,
                                          double y, const InfoState& s, double u) {
    TransformedCosts out{};
    if (!model.running_cost_uses_lambda && !model.terminal_cost_uses_lambda) {
        out.running = model.running_cost(t, y, u, prior.loc(0));
        out.terminal = model.terminal_cost(y, prior.loc(0));
        return out;
    }
    std::vector<double> p(prior.n_atoms());
    posterior_weights(prior, s, p);
    if (model.running_cost_uses_lambda) {
        for (std::size_t i = 0; i < prior.n_atoms(); ++i)
            out.running += p[i] * model.running_cost(t, y, u, prior.loc(i));
    } else {
        out.running = model.running_cost(t, y, u, prior.loc(0));
    }
    if (model.terminal_cost_uses_lambda) {
        for (std::size_t i = 0; i < prior.n_atoms(); ++i)
            out.terminal += p[i] * model.terminal_cost(y, prior.loc(i));
    } else {
        out.terminal = model.terminal_cost(y, prior.loc(0));
    }
    return out;
}

}  // namespace adc
