#pragma once

// Seeded Euler-Maruyama simulation of controlled paths in two modes.
//
// physical:    lambda is drawn from the posterior at the starting
//              information state (the prior when starting from the origin),
//              Y is driven by W, and (Upsilon, Gamma) are integrated along
//              the observed path; costs use the true lambda.
// innovations: the extended state (A, Upsilon, Gamma) is driven by a single
//              Brownian motion with drift f and diffusion Sigma; costs use
//              the transformed k~, g~.
//
// Controls are evaluated at the left endpoint and running costs accumulate
// at the left endpoint. Identical (seed, stream) gives bit-identical paths.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "adc/dynamics.hpp"
#include "adc/filter.hpp"
#include "adc/model.hpp"
#include "adc/prior.hpp"
#include "adc/rng.hpp"

namespace adc {

enum class SimMode { physical, innovations };

struct SimConfig {
    int n_steps = 256;
    double t0 = 0.0;
    double t1 = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;  // per-path stream index
    SimMode mode = SimMode::physical;

    void validate(double horizon) const {
        if (n_steps < 1) throw std::invalid_argument("SimConfig: n_steps must be >= 1");
        if (!(t0 < t1) || t1 > horizon + 1e-12)
            throw std::invalid_argument("SimConfig: need t0 < t1 <= horizon");
    }
};

struct PathRecord {
    std::vector<double> times;        // n+1
    std::vector<double> a;            // Y (physical) or A (innovations)
    std::vector<double> upsilon;      // n+1 (m = 1 layout: one per step)
    std::vector<double> gamma;        // n+1
    std::vector<double> controls;     // n+1; last entry repeats the final applied control
    std::vector<double> innovations;  // n+1; slot k >= 1 holds the V-increment over step k-1
    std::vector<double> cum_cost;     // n+1; running cost so far, terminal cost in the last slot
    std::vector<double> lambda_true;  // m entries, physical mode only
    double realized_cost = 0.0;
    bool control_clipped = false;

    std::size_t n_steps() const { return times.empty() ? 0 : times.size() - 1; }
};

namespace detail {

inline std::size_t sample_atom(const Prior& prior, const InfoState& s0, double unif) {
    std::vector<double> p(prior.n_atoms());
    posterior_weights(prior, s0, p);
    double acc = 0.0;
    for (std::size_t i = 0; i < prior.n_atoms(); ++i) {
        acc += p[i];
        if (unif <= acc) return i;
    }
    return prior.n_atoms() - 1;
}

}  // namespace detail

// Physical-measure path from (t0, y0, info0); lambda ~ posterior at info0.
inline PathRecord simulate_physical(const Model& model, const Prior& prior, const Policy& policy,
                                    const SimConfig& cfg, double y0 = 0.0,
                                    const InfoState* info0 = nullptr) {
    if (model.dim != 1) throw UnsupportedDimension("simulate_physical: requires m == 1");
    cfg.validate(model.horizon);
    PathRecord rec;
    const int n = cfg.n_steps;
    const double dt = (cfg.t1 - cfg.t0) / n;
    const double sq = std::sqrt(dt);
    rec.times.resize(n + 1);
    rec.a.resize(n + 1);
    rec.upsilon.resize(n + 1);
    rec.gamma.resize(n + 1);
    rec.controls.resize(n + 1);
    rec.innovations.assign(n + 1, 0.0);
    rec.cum_cost.assign(n + 1, 0.0);

    PhiloxRng rng(cfg.seed, cfg.stream);
    InfoState s = info0 ? *info0 : InfoState(1);
    const std::size_t atom = detail::sample_atom(prior, s, rng.uniform());
    const double lam = prior.loc1(atom);
    rec.lambda_true.assign(1, lam);

    double y = y0;
    double ups = s.upsilon[0], gam = s.gamma.entries[0];
    double cost = 0.0;
    ExtendedState x(cfg.t0, y, ups, gam);
    for (int k = 0; k <= n; ++k) {
        const double t = cfg.t0 + k * dt;
        x.t = t;
        x.a = y;
        x.info.upsilon[0] = ups;
        x.info.gamma.entries[0] = gam;
        rec.times[k] = t;
        rec.a[k] = y;
        rec.upsilon[k] = ups;
        rec.gamma[k] = gam;
        rec.cum_cost[k] = cost;
        if (k == n) {
            rec.controls[k] = rec.controls[k - 1];
            break;
        }
        double u = policy(x);
        const double uc = model.clip_control(u);
        if (uc != u) rec.control_clipped = true;
        u = uc;
        rec.controls[k] = u;

        cost += model.running_cost(t, y, u, rec.lambda_true) * dt;

        const double b = model.drift1(t, y, u);
        const double sig = model.noise(t, y, u);
        const double g = posterior_mean_m1(prior, ups, gam);
        const double dw = sq * rng.normal();
        const double dy = lam * b * dt + sig * dw;
        rec.innovations[k + 1] = (dy - g * b * dt) / sig;
        ups += b / (sig * sig) * dy;
        gam += b * b / (sig * sig) * dt;
        y += dy;
    }
    cost += model.terminal_cost(y, rec.lambda_true);
    rec.cum_cost[n] = cost;
    rec.realized_cost = cost;
    return rec;
}

// Extended-state path from x0 under the innovations Brownian motion.
inline PathRecord simulate_innovations(const Model& model, const Prior& prior,
                                       const Policy& policy, const ExtendedState& x0,
                                       const SimConfig& cfg) {
    if (model.dim != 1) throw UnsupportedDimension("simulate_innovations: requires m == 1");
    cfg.validate(model.horizon);
    PathRecord rec;
    const int n = cfg.n_steps;
    const double dt = (cfg.t1 - cfg.t0) / n;
    const double sq = std::sqrt(dt);
    rec.times.resize(n + 1);
    rec.a.resize(n + 1);
    rec.upsilon.resize(n + 1);
    rec.gamma.resize(n + 1);
    rec.controls.resize(n + 1);
    rec.innovations.assign(n + 1, 0.0);
    rec.cum_cost.assign(n + 1, 0.0);

    PhiloxRng rng(cfg.seed, cfg.stream);
    double a = x0.a;
    double ups = x0.info.upsilon[0], gam = x0.info.gamma.entries[0];
    double cost = 0.0;
    ExtendedState x = x0;
    for (int k = 0; k <= n; ++k) {
        const double t = cfg.t0 + k * dt;
        x.t = t;
        x.a = a;
        x.info.upsilon[0] = ups;
        x.info.gamma.entries[0] = gam;
        rec.times[k] = t;
        rec.a[k] = a;
        rec.upsilon[k] = ups;
        rec.gamma[k] = gam;
        rec.cum_cost[k] = cost;
        if (k == n) {
            rec.controls[k] = rec.controls[k - 1];
            break;
        }
        double u = policy(x);
        const double uc = model.clip_control(u);
        if (uc != u) rec.control_clipped = true;
        u = uc;
        rec.controls[k] = u;

        cost += transformed_costs(model, prior, t, a, x.info, u).running * dt;

        const double b = model.drift1(t, a, u);
        const double sig = model.noise(t, a, u);
        const double g = posterior_mean_m1(prior, ups, gam);
        const double dv = sq * rng.normal();
        rec.innovations[k + 1] = dv;
        const double rate = b * b / (sig * sig);
        a += g * b * dt + sig * dv;
        ups += g * rate * dt + b / sig * dv;
        gam += rate * dt;
    }
    x.t = cfg.t1;
    x.a = a;
    x.info.upsilon[0] = ups;
    x.info.gamma.entries[0] = gam;
    cost += transformed_costs(model, prior, cfg.t1, a, x.info, 0.0).terminal;
    rec.cum_cost[n] = cost;
    rec.realized_cost = cost;
    return rec;
}

// Euler-steps the conditional-variance SDE
//   d var = -G^2 (G_2 + G^2) b^2/sigma^2 dt + G_upsups b/sigma dV
// with the recorded innovations increments and compares against the direct
// posterior variance along the same path; returns the max absolute gap.
inline double variance_sde_residual(const Model& model, const Prior& prior,
                                    const PathRecord& path) {
    if (model.dim != 1) throw UnsupportedDimension("variance_sde_residual: requires m == 1");
    if (path.innovations.size() != path.times.size() || path.times.size() < 2)
        throw std::invalid_argument("variance_sde_residual: missing innovations record");
    double var = posterior_variance_m1(prior, path.upsilon[0], path.gamma[0]);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
        const double t = path.times[k];
        const double dt = path.times[k + 1] - path.times[k];
        const double ups = path.upsilon[k], gam = path.gamma[k];
        double mom[2];
        posterior_moments_m1(prior, ups, gam, mom);
        const double g = mom[0], g2 = mom[1];
        const double guu = posterior_dvariance_dups_m1(prior, ups, gam);
        const double b = model.drift1(t, path.a[k], path.controls[k]);
        const double sig = model.noise(t, path.a[k], path.controls[k]);
        var += -g * g * (g2 + g * g) * b * b / (sig * sig) * dt +
               guu * b / sig * path.innovations[k + 1];
        const double direct =
            posterior_variance_m1(prior, path.upsilon[k + 1], path.gamma[k + 1]);
        worst = std::max(worst, std::abs(var - direct));
    }
    return worst;
}

}  // namespace adc
