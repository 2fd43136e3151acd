#pragma once

// Monte Carlo cost evaluation with confidence intervals, moment-targeted
// state search, and controller comparison sweeps with common random numbers
// (streams keyed by (master seed, point index, path index); the policy index
// is deliberately excluded so policies share noise).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "adc/errors.hpp"
#include "adc/filter.hpp"
#include "adc/model.hpp"
#include "adc/parallel.hpp"
#include "adc/prior.hpp"
#include "adc/simulate.hpp"

namespace adc {

struct CostEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long n_paths = 0;
    SimMode mode = SimMode::innovations;
    long n_excluded = 0;
};

struct McOptions {
    int n_steps = 1024;
    std::uint64_t seed = 0;
    SimMode mode = SimMode::innovations;
    int n_threads = 1;
    std::uint64_t point_index = 0;  // folded into the per-path stream
};

namespace detail {

inline std::uint64_t path_stream(std::uint64_t point_index, std::uint64_t path_index) {
    return (point_index << 40) ^ path_index;
}

}  // namespace detail

// Mean and standard error of the realized cost over seeded parallel paths.
// Non-finite paths are excluded and counted; more than 1% excluded is an
// error. Deterministic given (seed, point_index) for any thread count.
inline CostEstimate estimate_cost(const Model& model, const Prior& prior, const Policy& policy,
                                  double t0, const ExtendedState& x0, long n_paths,
                                  const McOptions& opt) {
    if (n_paths < 2) throw std::invalid_argument("estimate_cost: need n_paths >= 2");
    std::vector<double> costs(n_paths);
    SimConfig base;
    base.n_steps = opt.n_steps;
    base.t0 = t0;
    base.t1 = model.horizon;
    base.seed = opt.seed;
    base.mode = opt.mode;
    parallel_for(static_cast<std::size_t>(n_paths), opt.n_threads, [&](std::size_t i) {
        SimConfig cfg = base;
        cfg.stream = detail::path_stream(opt.point_index, i);
        if (opt.mode == SimMode::physical) {
            costs[i] =
                simulate_physical(model, prior, policy, cfg, x0.a, &x0.info).realized_cost;
        } else {
            ExtendedState x = x0;
            x.t = t0;
            costs[i] = simulate_innovations(model, prior, policy, x, cfg).realized_cost;
        }
    });
    CostEstimate est;
    est.mode = opt.mode;
    double sum = 0.0;
    long kept = 0;
    for (double cst : costs) {
        if (std::isfinite(cst)) {
            sum += cst;
            ++kept;
        } else {
            ++est.n_excluded;
        }
    }
    if (est.n_excluded * 100 > n_paths)
        throw std::runtime_error("estimate_cost: more than 1% of paths non-finite (" +
                                 std::to_string(est.n_excluded) + " of " +
                                 std::to_string(n_paths) + ")");
    est.n_paths = kept;
    est.mean = sum / kept;
    double ss = 0.0;
    for (double cst : costs)
        if (std::isfinite(cst)) ss += (cst - est.mean) * (cst - est.mean);
    est.stderr_ = kept > 1 ? std::sqrt(ss / (static_cast<double>(kept) - 1.0) / kept) : 0.0;
    return est;
}

// Paired common-random-number comparison of two policies: mean and standard
// error of the per-path cost difference (first minus second).
inline CostEstimate estimate_cost_difference(const Model& model, const Prior& prior,
                                             const Policy& first, const Policy& second,
                                             double t0, const ExtendedState& x0, long n_paths,
                                             const McOptions& opt) {
    if (n_paths < 2) throw std::invalid_argument("estimate_cost_difference: need n_paths >= 2");
    std::vector<double> diff(n_paths);
    SimConfig base;
    base.n_steps = opt.n_steps;
    base.t0 = t0;
    base.t1 = model.horizon;
    base.seed = opt.seed;
    base.mode = opt.mode;
    parallel_for(static_cast<std::size_t>(n_paths), opt.n_threads, [&](std::size_t i) {
        SimConfig cfg = base;
        cfg.stream = detail::path_stream(opt.point_index, i);
        double c1, c2;
        if (opt.mode == SimMode::physical) {
            c1 = simulate_physical(model, prior, first, cfg, x0.a, &x0.info).realized_cost;
            c2 = simulate_physical(model, prior, second, cfg, x0.a, &x0.info).realized_cost;
        } else {
            ExtendedState x = x0;
            x.t = t0;
            c1 = simulate_innovations(model, prior, first, x, cfg).realized_cost;
            c2 = simulate_innovations(model, prior, second, x, cfg).realized_cost;
        }
        diff[i] = c1 - c2;
    });
    CostEstimate est;
    est.mode = opt.mode;
    double sum = 0.0;
    long kept = 0;
    for (double d : diff) {
        if (std::isfinite(d)) {
            sum += d;
            ++kept;
        } else {
            ++est.n_excluded;
        }
    }
    if (est.n_excluded * 100 > n_paths)
        throw std::runtime_error("estimate_cost_difference: more than 1% of paths non-finite");
    est.n_paths = kept;
    est.mean = sum / kept;
    double ss = 0.0;
    for (double d : diff)
        if (std::isfinite(d)) ss += (d - est.mean) * (d - est.mean);
    est.stderr_ = kept > 1 ? std::sqrt(ss / (static_cast<double>(kept) - 1.0) / kept) : 0.0;
    return est;
}

// 2-D bisection for an information state with the requested posterior mean
// and variance (m = 1). Uses that, for fixed gamma, the mean is increasing
// in upsilon, and that the variance along the constant-mean curve decreases
// in gamma.
inline InfoState find_state_for_moments(const Prior& prior, double target_mean,
                                        double target_var, double tol = 1e-4) {
    if (prior.dim() != 1) throw UnsupportedDimension("find_state_for_moments: requires m == 1");
    const double lo_loc = prior.min_loc1(), hi_loc = prior.max_loc1();
    if (!(target_mean > lo_loc && target_mean < hi_loc))
        throw InfeasibleTarget("find_state_for_moments: mean " + std::to_string(target_mean) +
                               " outside the open support hull (" + std::to_string(lo_loc) +
                               ", " + std::to_string(hi_loc) + ")");
    if (!(target_var > 0.0))
        throw InfeasibleTarget("find_state_for_moments: variance target must be positive");

    const auto ups_for_mean = [&](double gam) {
        double lo = -1e4, hi = 1e4;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (posterior_mean_m1(prior, mid, gam) < target_mean ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };

    const double var0 = posterior_variance_m1(prior, ups_for_mean(0.0), 0.0);
    if (target_var > var0 + tol)
        throw InfeasibleTarget(
            "find_state_for_moments: variance " + std::to_string(target_var) +
            " exceeds the achievable value " + std::to_string(var0) + " at this mean");

    double glo = 0.0, ghi = 1.0;
    while (posterior_variance_m1(prior, ups_for_mean(ghi), ghi) > target_var) {
        ghi *= 2.0;
        if (ghi > 1e8)
            throw InfeasibleTarget("find_state_for_moments: variance target unreachable");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (glo + ghi);
        (posterior_variance_m1(prior, ups_for_mean(mid), mid) > target_var ? glo : ghi) = mid;
    }
    const double gam = 0.5 * (glo + ghi);
    InfoState s(ups_for_mean(gam), gam);
    const double got_mean = posterior_mean_m1(prior, s.upsilon[0], s.gamma.entries[0]);
    const double got_var = posterior_variance_m1(prior, s.upsilon[0], s.gamma.entries[0]);
    if (std::abs(got_mean - target_mean) > tol || std::abs(got_var - target_var) > tol)
        throw InfeasibleTarget("find_state_for_moments: no state within tolerance (reached mean " +
                               std::to_string(got_mean) + ", var " + std::to_string(got_var) +
                               ")");
    return s;
}

enum class SweepVariable { state_y, cond_variance, cond_mean };

struct SweepSpec {
    SweepVariable variable = SweepVariable::state_y;
    std::vector<double> values;  // strictly increasing abscissas
    double t0 = 0.0;
    double y0 = 0.0;         // fixed y for moment sweeps
    double base_mean = 0.5;  // fixed mean for a variance sweep
    double base_var = 0.07;  // fixed variance for a mean sweep
};

struct NamedPolicy {
    std::string name;
    Policy policy;
};

struct SweepPoint {
    double abscissa = 0.0;
    std::vector<double> mean;     // one per policy
    std::vector<double> stderr_;  // one per policy
};

struct ComparisonReport {
    SweepVariable variable = SweepVariable::state_y;
    std::vector<std::string> policy_names;
    std::vector<SweepPoint> points;
    std::uint64_t seed = 0;
    long n_paths = 0;
};

// Cost of each policy at each sweep point, with common random numbers
// across policies (streams depend on the point index, not the policy).
inline ComparisonReport compare(const Model& model, const Prior& prior,
                                const std::vector<NamedPolicy>& policies, const SweepSpec& sweep,
                                long n_paths, const McOptions& opt) {
    if (policies.empty()) throw std::invalid_argument("compare: need at least one policy");
    for (std::size_t i = 1; i < sweep.values.size(); ++i)
        if (!(sweep.values[i] > sweep.values[i - 1]))
            throw std::invalid_argument("compare: abscissas must be strictly increasing");
    ComparisonReport rep;
    rep.variable = sweep.variable;
    rep.seed = opt.seed;
    rep.n_paths = n_paths;
    for (const auto& p : policies) rep.policy_names.push_back(p.name);
    for (std::size_t pi = 0; pi < sweep.values.size(); ++pi) {
        const double v = sweep.values[pi];
        ExtendedState x0(sweep.t0, sweep.y0, 0.0, 0.0);
        switch (sweep.variable) {
            case SweepVariable::state_y:
                x0.a = v;
                break;
            case SweepVariable::cond_variance:
                x0.info = find_state_for_moments(prior, sweep.base_mean, v);
                break;
            case SweepVariable::cond_mean:
                x0.info = find_state_for_moments(prior, v, sweep.base_var);
                break;
        }
        SweepPoint pt;
        pt.abscissa = v;
        McOptions o = opt;
        o.point_index = pi;
        for (const auto& p : policies) {
            const CostEstimate est =
                estimate_cost(model, prior, p.policy, sweep.t0, x0, n_paths, o);
            pt.mean.push_back(est.mean);
            pt.stderr_.push_back(est.stderr_);
        }
        rep.points.push_back(std::move(pt));
    }
    return rep;
}

}  // namespace adc
