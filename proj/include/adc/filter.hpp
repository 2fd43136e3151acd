#pragma once

// The Widder transform F of the prior and all posterior quantities derived
// from it: transform F[phi], posterior mean G = F_ups/F, higher moments
// G_k (m = 1), conditional variance, and the backward-heat-equation residual
// diagnostic. All exponential sums are evaluated in log space with
// max-subtraction; derivatives of F are formed atom-wise, never by
// differencing a black box.

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "adc/errors.hpp"
#include "adc/prior.hpp"
#include "adc/symvec.hpp"

namespace adc {

namespace detail {

// log w_i + ell_i'ups - 0.5 ell_i'(Xi^-1 gamma) ell_i
inline double atom_exponent(const Prior& prior, std::size_t i, const InfoState& s) {
    const auto ell = prior.loc(i);
    double e = prior.log_weight(i);
    for (int d = 0; d < prior.dim(); ++d) e += ell[d] * s.upsilon[d];
    e -= 0.5 * quad_form(s.gamma, ell);
    return e;
}

inline double atom_exponent_m1(const Prior& prior, std::size_t i, double ups, double gam) {
    const double l = prior.loc1(i);
    return prior.log_weight(i) + l * ups - 0.5 * l * l * gam;
}

}  // namespace detail

// log F(ups, gamma)
inline double widder_log_f(const Prior& prior, const InfoState& s) {
    const std::size_t n = prior.n_atoms();
    double emax = -std::numeric_limits<double>::infinity();
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = detail::atom_exponent(prior, i, s);
        emax = std::max(emax, e[i]);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::exp(e[i] - emax);
    return emax + std::log(acc);
}

// F(ups, gamma); finite and > 0, else NumericOverflow.
inline double widder_f(const Prior& prior, const InfoState& s) {
    const double lf = widder_log_f(prior, s);
    const double f = std::exp(lf);
    if (!std::isfinite(f) || f <= 0.0)
        throw NumericOverflow("widder_f: value not representable, log F = " + std::to_string(lf));
    return f;
}

// Posterior atom weights p_i = w_i e^{e_i} / F (softmax); out.size() == n_atoms.
inline void posterior_weights(const Prior& prior, const InfoState& s, std::span<double> out) {
    const std::size_t n = prior.n_atoms();
    double emax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = detail::atom_exponent(prior, i, s);
        emax = std::max(emax, out[i]);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(out[i] - emax);
        acc += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= acc;
}

// E[phi(lambda) | state] = F[phi]/F, numerically stable for any state.
inline double posterior_expect(const Prior& prior,
                               const std::function<double(std::span<const double>)>& phi,
                               const InfoState& s) {
    std::vector<double> p(prior.n_atoms());
    posterior_weights(prior, s, p);
    double acc = 0.0;
    for (std::size_t i = 0; i < prior.n_atoms(); ++i) acc += p[i] * phi(prior.loc(i));
    return acc;
}

// F[phi](ups, gamma) = F * E[phi | state]; overflows with F.
inline double widder_transform(const Prior& prior,
                               const std::function<double(std::span<const double>)>& phi,
                               const InfoState& s) {
    return widder_f(prior, s) * posterior_expect(prior, phi, s);
}

// G = F_ups / F, the conditional mean; |G| <= prior bound K.
inline std::vector<double> posterior_mean_G(const Prior& prior, const InfoState& s) {
    std::vector<double> p(prior.n_atoms());
    posterior_weights(prior, s, p);
    std::vector<double> g(prior.dim(), 0.0);
    for (std::size_t i = 0; i < prior.n_atoms(); ++i) {
        const auto ell = prior.loc(i);
        for (int d = 0; d < prior.dim(); ++d) g[d] += p[i] * ell[d];
    }
    return g;
}

// m = 1 fast paths, no allocation.

inline double posterior_mean_m1(const Prior& prior, double ups, double gam) {
    const std::size_t n = prior.n_atoms();
    double emax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        emax = std::max(emax, detail::atom_exponent_m1(prior, i, ups, gam));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(detail::atom_exponent_m1(prior, i, ups, gam) - emax);
        num += w * prior.loc1(i);
        den += w;
    }
    return num / den;
}

// First nmom raw posterior moments of lambda (m = 1), one pass.
inline void posterior_moments_m1(const Prior& prior, double ups, double gam,
                                 std::span<double> out) {
    const std::size_t n = prior.n_atoms();
    double emax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        emax = std::max(emax, detail::atom_exponent_m1(prior, i, ups, gam));
    for (auto& v : out) v = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(detail::atom_exponent_m1(prior, i, ups, gam) - emax);
        den += w;
        double lk = 1.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            lk *= prior.loc1(i);
            out[k] += w * lk;
        }
    }
    for (auto& v : out) v /= den;
}

// G_k = (d^k_ups F) / F = E[lambda^k | state]; m = 1 only.
inline double posterior_moment_Gk(const Prior& prior, int k, const InfoState& s) {
    if (prior.dim() != 1 || s.dim() != 1)
        throw UnsupportedDimension("posterior_moment_Gk: requires m == 1");
    if (k < 1) throw std::invalid_argument("posterior_moment_Gk: k must be positive");
    std::vector<double> mom(k);
    posterior_moments_m1(prior, s.upsilon[0], s.gamma.entries[0], mom);
    return mom[k - 1];
}

// Var[lambda | state] = G_2 - G^2 >= 0 (clamped); m = 1 only.
inline double posterior_variance(const Prior& prior, const InfoState& s) {
    if (prior.dim() != 1 || s.dim() != 1)
        throw UnsupportedDimension("posterior_variance: requires m == 1");
    double mom[2];
    posterior_moments_m1(prior, s.upsilon[0], s.gamma.entries[0], mom);
    const double v = mom[1] - mom[0] * mom[0];
    if (v < -1e-12) return 0.0;  // defensive; analytic value is >= 0
    return v < 0.0 ? 0.0 : v;
}

inline double posterior_variance_m1(const Prior& prior, double ups, double gam) {
    double mom[2];
    posterior_moments_m1(prior, ups, gam, mom);
    const double v = mom[1] - mom[0] * mom[0];
    return v < 0.0 ? 0.0 : v;
}

// G_upsups = G_3 - 3 G_1 G_2 + 2 G_1^3 (third central moment); m = 1.
// Appears as the diffusion coefficient of the conditional-variance dynamics.
inline double posterior_dvariance_dups_m1(const Prior& prior, double ups, double gam) {
    double mom[3];
    posterior_moments_m1(prior, ups, gam, mom);
    return mom[2] - 3.0 * mom[0] * mom[1] + 2.0 * mom[0] * mom[0] * mom[0];
}

// Central finite-difference estimate of F_gamma + 0.5 F_upsups, which
// vanishes identically (every atom exponent solves the backward heat
// equation). Returned on the scale of F; |result| = O(h^2) * F. Evaluated
// through exponent ratios so it stays finite wherever F does not overflow.
inline double heat_residual(const Prior& prior, const InfoState& s, double h) {
    if (prior.dim() != 1 || s.dim() != 1)
        throw UnsupportedDimension("heat_residual: requires m == 1");
    if (!(h > 0.0)) throw std::invalid_argument("heat_residual: h must be positive");
    const double ups = s.upsilon[0], gam = s.gamma.entries[0];
    const double lf0 = widder_log_f(prior, s);
    const auto rel = [&](double du, double dg) {
        return std::exp(widder_log_f(prior, InfoState(ups + du, gam + dg)) - lf0);
    };
    const double f_gam = (rel(0.0, h) - rel(0.0, -h)) / (2.0 * h);
    const double f_upsups = (rel(h, 0.0) - 2.0 + rel(-h, 0.0)) / (h * h);
    return (f_gam + 0.5 * f_upsups) * std::exp(lf0);
}

}  // namespace adc
