#pragma once

// Extended-state drift f and diffusion Sigma of the full-information
// problem, and the Hamiltonian residual function used as an HJB diagnostic.
// The extended state is (A, Upsilon, Gamma) of dimension 1 + m + m(m+1)/2;
// a single innovations Brownian motion drives (A, Upsilon) and the Gamma
// block is not diffusive, so the second-order coefficient has rank one.

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "adc/filter.hpp"
#include "adc/model.hpp"

namespace adc {

struct ExtendedState {
    double t = 0.0;
    double a = 0.0;
    InfoState info;

    ExtendedState() : info(1) {}
    ExtendedState(double t_, double a_, InfoState s) : t(t_), a(a_), info(std::move(s)) {}
    // m = 1 convenience
    ExtendedState(double t_, double a_, double ups, double gam)
        : t(t_), a(a_), info(ups, gam) {}

    int dim() const { return 1 + info.dim() + static_cast<int>(SymVec::packed_size(info.dim())); }
};

// A feedback rule (t, x) -> u.
using Policy = std::function<double(const ExtendedState&)>;

inline Policy constant_policy(double u) {
    return [u](const ExtendedState&) { return u; };
}

// f(t,x,u) = (G'b, (b/sigma^2) G'b, Xi (b b')/sigma^2)
inline std::vector<double> extended_drift(const Model& model, const Prior& prior,
                                          const ExtendedState& x, double u) {
    const int m = model.dim;
    std::vector<double> b(m);
    model.drift_basis(x.t, x.a, u, b);
    const double sig = model.noise(x.t, x.a, u);
    const double sig2 = sig * sig;
    const std::vector<double> g = posterior_mean_G(prior, x.info);
    double gb = 0.0;
    for (int d = 0; d < m; ++d) gb += g[d] * b[d];

    std::vector<double> f(x.dim());
    f[0] = gb;
    for (int d = 0; d < m; ++d) f[1 + d] = b[d] / sig2 * gb;
    std::size_t k = 1 + m;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= i; ++j) f[k++] = b[i] * b[j] / sig2;
    return f;
}

// Sigma(t,x,u) = (sigma, b/sigma, 0); the Gamma block is exactly zero.
inline std::vector<double> extended_diffusion(const Model& model, const ExtendedState& x,
                                              double u) {
    const int m = model.dim;
    std::vector<double> b(m);
    model.drift_basis(x.t, x.a, u, b);
    const double sig = model.noise(x.t, x.a, u);
    std::vector<double> s(x.dim(), 0.0);
    s[0] = sig;
    for (int d = 0; d < m; ++d) s[1 + d] = b[d] / sig;
    return s;
}

// rF(t,x,p,q,Q) = -p - min_u { f.q + 0.5 Sigma'Q Sigma + k~ } over the
// discretized control set; ties broken toward smallest |u|, then smallest u.
inline double hamiltonian(const Model& model, const Prior& prior, const ExtendedState& x,
                          double p_t, std::span<const double> q, std::span<const double> Q,
                          double sym_tol = 1e-9) {
    const int md = x.dim();
    if (q.size() != static_cast<std::size_t>(md))
        throw std::invalid_argument("hamiltonian: gradient size mismatch");
    if (Q.size() != static_cast<std::size_t>(md) * md)
        throw std::invalid_argument("hamiltonian: Hessian size mismatch");
    for (int i = 0; i < md; ++i)
        for (int j = 0; j < i; ++j)
            if (std::abs(Q[i * md + j] - Q[j * md + i]) > sym_tol)
                throw std::invalid_argument("hamiltonian: Hessian is not symmetric");
    const std::vector<double> controls = model.control_grid();
    if (controls.empty()) throw std::invalid_argument("hamiltonian: empty control set");

    double best = std::numeric_limits<double>::infinity();
    for (double u : controls) {
        const std::vector<double> f = extended_drift(model, prior, x, u);
        const std::vector<double> sig = extended_diffusion(model, x, u);
        double fq = 0.0;
        for (int i = 0; i < md; ++i) fq += f[i] * q[i];
        double sqs = 0.0;  // Sigma' Q Sigma (rank-one second-order term)
        for (int i = 0; i < md; ++i) {
            if (sig[i] == 0.0) continue;
            for (int j = 0; j < md; ++j) sqs += sig[i] * Q[i * md + j] * sig[j];
        }
        const double kt = transformed_costs(model, prior, x.t, x.a, x.info, u).running;
        best = std::min(best, fq + 0.5 * sqs + kt);
    }
    return -p_t - best;
}

}  // namespace adc
