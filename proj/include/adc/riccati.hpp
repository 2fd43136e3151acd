#pragma once

// Riccati system for the observable-lambda LQ problem
//
//   f1' = lambda^2 f1^2 / rho - c,   f2' = -sigma0^2 f1,
//   f1(T) = C, f2(T) = 0,
//
// integrated backward by RK4, and the naive / certainty-equivalent benchmark
// feedback maps built from it. The drift denominator is rho, consistent with
// the feedback map u = -lambda f1 a / rho; rho^2 is available as a switch.

#include <atomic>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "adc/dynamics.hpp"
#include "adc/errors.hpp"
#include "adc/filter.hpp"
#include "adc/model.hpp"
#include "adc/prior.hpp"

namespace adc {

struct LQParams {
    double sigma0 = 1.0;
    double T = 1.0;
    double rho = 2.0;
    double c = 2.0;
    double C = 5.0;

    void validate() const {
        if (!(sigma0 > 0 && T > 0 && rho > 0 && c > 0 && C > 0))
            throw std::invalid_argument("LQParams: all parameters must be strictly positive");
    }
};

enum class RiccatiDenominator { rho, rho_squared };

struct RiccatiSolution {
    double lambda = 0.0;
    LQParams params;
    double step = 0.0;        // ODE grid spacing
    std::vector<double> f1;   // samples on t = i * step, i = 0..n
    std::vector<double> f2;

    double f1_at(double t) const { return interp(f1, t); }
    double f2_at(double t) const { return interp(f2, t); }

private:
    double interp(const std::vector<double>& v, double t) const {
        const double pos = t / step;
        if (pos <= 0.0) return v.front();
        if (pos >= static_cast<double>(v.size() - 1)) return v.back();
        const std::size_t i = static_cast<std::size_t>(pos);
        const double th = pos - static_cast<double>(i);
        return v[i] * (1.0 - th) + v[i + 1] * th;
    }
};

inline RiccatiSolution solve_riccati(double lambda, const LQParams& p, int n_ode_steps = 1024,
                                     RiccatiDenominator den = RiccatiDenominator::rho) {
    p.validate();
    if (n_ode_steps < 16) throw std::invalid_argument("solve_riccati: need at least 16 steps");
    RiccatiSolution sol;
    sol.lambda = lambda;
    sol.params = p;
    sol.step = p.T / n_ode_steps;
    sol.f1.assign(n_ode_steps + 1, 0.0);
    sol.f2.assign(n_ode_steps + 1, 0.0);
    sol.f1[n_ode_steps] = p.C;
    sol.f2[n_ode_steps] = 0.0;

    const double denom = den == RiccatiDenominator::rho ? p.rho : p.rho * p.rho;
    const double lam2 = lambda * lambda;
    const auto d_f1 = [&](double f1) { return lam2 * f1 * f1 / denom - p.c; };
    const double h = -sol.step;  // backward
    for (int i = n_ode_steps; i > 0; --i) {
        const double y1 = sol.f1[i], y2 = sol.f2[i];
        const double k1a = d_f1(y1), k1b = -p.sigma0 * p.sigma0 * y1;
        const double k2a = d_f1(y1 + 0.5 * h * k1a), k2b = -p.sigma0 * p.sigma0 * (y1 + 0.5 * h * k1a);
        const double k3a = d_f1(y1 + 0.5 * h * k2a), k3b = -p.sigma0 * p.sigma0 * (y1 + 0.5 * h * k2a);
        const double k4a = d_f1(y1 + h * k3a), k4b = -p.sigma0 * p.sigma0 * (y1 + h * k3a);
        sol.f1[i - 1] = y1 + h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        sol.f2[i - 1] = y2 + h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        if (std::abs(sol.f1[i - 1]) > 1e12)
            throw NumericOverflow("solve_riccati: f1 blow-up at t = " +
                                  std::to_string((i - 1) * sol.step));
    }
    return sol;
}

// u = -lambda f1(t) a / rho, before clipping.
inline double lq_feedback(const RiccatiSolution& sol, double t, double a) {
    return -sol.lambda * sol.f1_at(t) * a / sol.params.rho;
}

// Known-lambda LQ feedback, clipped to the model control box.
inline Policy lq_policy(const Model& model, const RiccatiSolution& sol) {
    return [&model, sol](const ExtendedState& x) {
        return model.clip_control(lq_feedback(sol, x.t, x.a));
    };
}

// Gain frozen at the prior mean; ignores (Upsilon, Gamma).
inline Policy naive_policy(const Model& model, const LQParams& p, const Prior& prior,
                           int n_ode_steps = 1024,
                           RiccatiDenominator den = RiccatiDenominator::rho) {
    auto sol = std::make_shared<RiccatiSolution>(solve_riccati(prior.mean1(), p, n_ode_steps, den));
    return [&model, sol](const ExtendedState& x) {
        return model.clip_control(lq_feedback(*sol, x.t, x.a));
    };
}

// Precomputed Riccati solutions on a lambda grid spanning the prior support,
// interpolated bilinearly in (lambda, t). Immutable after construction.
class RiccatiCache {
public:
    RiccatiCache(const LQParams& p, double lambda_min, double lambda_max, int n_lambda = 101,
                 int n_ode_steps = 1024, RiccatiDenominator den = RiccatiDenominator::rho)
        : lo_(lambda_min), hi_(lambda_max) {
        if (!(lambda_max >= lambda_min))
            throw std::invalid_argument("RiccatiCache: bad lambda range");
        if (n_lambda < 2) n_lambda = 2;
        if (hi_ == lo_) hi_ = lo_ + 1e-9;
        sols_.reserve(n_lambda);
        for (int i = 0; i < n_lambda; ++i) {
            const double lam = lo_ + (hi_ - lo_) * i / (n_lambda - 1);
            sols_.push_back(solve_riccati(lam, p, n_ode_steps, den));
        }
    }

    double lambda_min() const { return lo_; }
    double lambda_max() const { return hi_; }
    long clamp_count() const { return clamped_.load(); }

    // f1^{lambda}(t), lambda clamped (and counted) outside the cached range.
    double f1_at(double lambda, double t) const {
        if (lambda < lo_ || lambda > hi_) {
            clamped_.fetch_add(1, std::memory_order_relaxed);
            lambda = lambda < lo_ ? lo_ : hi_;
        }
        const double pos = (lambda - lo_) / (hi_ - lo_) * (sols_.size() - 1);
        std::size_t i = static_cast<std::size_t>(pos);
        if (i >= sols_.size() - 1) i = sols_.size() - 2;
        const double th = pos - static_cast<double>(i);
        return sols_[i].f1_at(t) * (1.0 - th) + sols_[i + 1].f1_at(t) * th;
    }

private:
    double lo_, hi_;
    std::vector<RiccatiSolution> sols_;
    mutable std::atomic<long> clamped_{0};
};

// u = -G f1^{G}(t) a / rho with G the current posterior mean; clipped.
inline Policy ce_policy(const Model& model, const LQParams& p, const Prior& prior,
                        std::shared_ptr<const RiccatiCache> cache) {
    const double rho = p.rho;
    return [&model, &prior, cache, rho](const ExtendedState& x) {
        const double lam_hat =
            posterior_mean_m1(prior, x.info.upsilon[0], x.info.gamma.entries[0]);
        return model.clip_control(-lam_hat * cache->f1_at(lam_hat, x.t) * x.a / rho);
    };
}

inline std::shared_ptr<const RiccatiCache> make_ce_cache(
    const LQParams& p, const Prior& prior, int n_lambda = 101, int n_ode_steps = 1024,
    RiccatiDenominator den = RiccatiDenominator::rho) {
    return std::make_shared<RiccatiCache>(p, prior.min_loc1(), prior.max_loc1(), n_lambda,
                                          n_ode_steps, den);
}

}  // namespace adc
