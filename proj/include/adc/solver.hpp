#pragma once

// Backward induction over piecewise constant controls on a dyadic time grid
// (m = 1). One Bellman step approximates
//
//   E[ k~(t,x,u) dt + w(X_{t+dt}) ]
//
// by an Euler drift step (optionally refined into substeps, noise applied
// once) with the single Brownian driver realized through a deterministic
// quadrature, and clamped multilinear interpolation of the next slice.
//
// Two quadratures are available. "gauss_hermite" places the driver at the
// Gauss-Hermite nodes. The default "lattice" rule instead places the a-axis
// successor exactly on grid cells and solves small moment systems for the
// node weights (positive, so the scheme stays monotone); this removes the
// dominant piecewise-linear interpolation bias of the a-axis.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "adc/dynamics.hpp"
#include "adc/errors.hpp"
#include "adc/filter.hpp"
#include "adc/grid.hpp"
#include "adc/model.hpp"
#include "adc/parallel.hpp"
#include "adc/prior.hpp"
#include "adc/quadrature.hpp"
#include "adc/riccati.hpp"

namespace adc {

namespace detail {

// Dense inverse by Gauss-Jordan with partial pivoting (tiny systems only).
inline std::vector<double> invert_dense(std::vector<double> a, int n) {
    std::vector<double> inv(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (piv != col)
            for (int cc = 0; cc < n; ++cc) {
                std::swap(a[piv * n + cc], a[col * n + cc]);
                std::swap(inv[piv * n + cc], inv[col * n + cc]);
            }
        const double d = a[col * n + col];
        for (int cc = 0; cc < n; ++cc) {
            a[col * n + cc] /= d;
            inv[col * n + cc] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col];
            if (f == 0.0) continue;
            for (int cc = 0; cc < n; ++cc) {
                a[r * n + cc] -= f * a[col * n + cc];
                inv[r * n + cc] -= f * inv[col * n + cc];
            }
        }
    }
    return inv;
}

// Grid-aligned quadrature of the Gaussian displacement N(D, s^2) (cell
// units): nodes on integer (strided) cells, weights matching raw moments.
class LatticeBuilder {
public:
    struct Rule {
        int n = 0;
        std::array<long long, 10> cell{};  // absolute target cells
        std::array<double, 10> w{};
    };

    explicit LatticeBuilder(int max_half_width = 4) : jmax_(std::clamp(max_half_width, 1, 4)) {
        for (int J = 2; J <= jmax_; ++J) {
            const int n = 2 * J + 1;
            std::vector<double> v(static_cast<std::size_t>(n) * n);
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j)
                    v[k * n + j] = std::pow(static_cast<double>(j - J), k);
            inv_[J] = invert_dense(std::move(v), n);
        }
        zmom_ = normal_moments(8);
    }

    // D: mean position (cells, may be any real); s: std dev (cells).
    Rule build(double D, double s) const {
        for (int J = jmax_; J >= 2; --J) {
            const int m_lo = std::max(1, static_cast<int>(std::ceil(2.8 * s / J)));
            for (int m = m_lo; m <= m_lo + 2; ++m) {
                Rule r;
                if (try_stride(J, m, D, s, r)) return r;
            }
        }
        return fallback(D, s);
    }

private:
    bool try_stride(int J, int m, double D, double s, Rule& out) const {
        const double base = std::round(D / m) * m;
        const double nu = (D - base) / m;  // in [-0.5, 0.5]
        const double ss = s / m;
        const int n = 2 * J + 1;
        double nup[9], ssp[9];
        nup[0] = ssp[0] = 1.0;
        for (int k = 1; k < n; ++k) {
            nup[k] = nup[k - 1] * nu;
            ssp[k] = ssp[k - 1] * ss;
        }
        // raw moments of nu + ss Z, k = 0..2J
        std::array<double, 9> mom{};
        for (int k = 0; k < n; ++k) {
            double acc = 0.0, comb = 1.0;
            for (int i = 0; i <= k; ++i) {
                if ((i & 1) == 0) acc += comb * nup[k - i] * ssp[i] * zmom_[i];
                comb = comb * (k - i) / (i + 1.0);
            }
            mom[k] = acc;
        }
        const std::vector<double>& inv = inv_.at(J);
        std::array<double, 9> w{};
        double wmin = 0.0;
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += inv[j * n + k] * mom[k];
            w[j] = acc;
            wmin = std::min(wmin, acc);
        }
        if (wmin < -1e-12) return false;
        double wsum = 0.0;
        for (int j = 0; j < n; ++j) {
            w[j] = std::max(w[j], 0.0);
            wsum += w[j];
        }
        out.n = n;
        for (int j = 0; j < n; ++j) {
            out.cell[j] = std::llround(base) + static_cast<long long>(m) * (j - J);
            out.w[j] = w[j] / wsum;
        }
        return true;
    }

    // Bernoulli split of the fractional drift times a variance-matched
    // trinomial; always positive, inflates variance by theta(1-theta).
    Rule fallback(double D, double s) const {
        const long long f = static_cast<long long>(std::floor(D));
        const double th = D - static_cast<double>(f);
        const int m = std::max(1, static_cast<int>(std::ceil(s)));
        const double pv = s * s / (static_cast<double>(m) * m);
        Rule r;
        const double wb[2] = {1.0 - th, th};
        const long long ob[2] = {f, f + 1};
        const double wt[3] = {0.5 * pv, 1.0 - pv, 0.5 * pv};
        const long long ot[3] = {-m, 0, m};
        r.n = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j) {
                r.cell[r.n] = ob[i] + ot[j];
                r.w[r.n] = wb[i] * wt[j];
                ++r.n;
            }
        return r;
    }

    int jmax_;
    std::array<std::vector<double>, 5> inv_;  // indexed by J
    std::vector<double> zmom_;
};

// Precomputed per-(ups,gamma)-node posterior data for one solve.
struct PosteriorTables {
    std::vector<double> mean;     // nu*ng
    std::vector<double> weights;  // nu*ng*natoms, only if any cost reads lambda
    bool have_weights = false;

    static PosteriorTables build(const Model& model, const Prior& prior, const GridSpec& g) {
        PosteriorTables t;
        const int nu = g.ups_axis.count, ng = g.gamma_axis.count;
        const std::size_t n = static_cast<std::size_t>(nu) * ng;
        t.mean.resize(n);
        t.have_weights = model.running_cost_uses_lambda || model.terminal_cost_uses_lambda;
        if (t.have_weights) t.weights.resize(n * prior.n_atoms());
        for (int ig = 0; ig < ng; ++ig) {
            for (int iu = 0; iu < nu; ++iu) {
                const double ups = g.ups_axis.value(iu);
                const double gam = g.gamma_axis.value(ig);
                const std::size_t idx = static_cast<std::size_t>(ig) * nu + iu;
                t.mean[idx] = posterior_mean_m1(prior, ups, gam);
                if (t.have_weights) {
                    InfoState s(ups, gam);
                    posterior_weights(prior, s,
                                      std::span<double>(t.weights.data() + idx * prior.n_atoms(),
                                                        prior.n_atoms()));
                }
            }
        }
        return t;
    }
};

struct StepScratch {
    const LatticeBuilder* lattice = nullptr;
    const QuadratureRule* hermite = nullptr;
};

// One Bellman evaluation. g_mean is G at the (ups,gamma) of x; post_w points
// at the posterior atom weights there (may be null when no cost reads
// lambda).
inline double bellman_core(const Model& model, const Prior& prior, const GridSpec& grid,
                           std::span<const double> w_next, double dt, double t, double a0,
                           double ups0, double gam0, double u, double g_mean,
                           const double* post_w, const StepScratch& scratch) {
    // running cost, left endpoint
    double run;
    if (!model.running_cost_uses_lambda) {
        run = model.running_cost(t, a0, u, prior.loc(0));
    } else {
        run = 0.0;
        for (std::size_t i = 0; i < prior.n_atoms(); ++i)
            run += post_w[i] * model.running_cost(t, a0, u, prior.loc(i));
    }

    // deterministic drift, refined into substeps; noise applied once below
    double a = a0, ups = ups0, gam = gam0, g = g_mean;
    const int S = grid.substeps;
    const double h = dt / S;
    for (int s = 0; s < S; ++s) {
        const double ts = t + s * h;
        double b;
        model.drift_basis(ts, a, u, std::span<double>(&b, 1));
        const double sig = model.noise(ts, a, u);
        const double rate = b * b / (sig * sig);
        a += g * b * h;
        ups += g * rate * h;
        gam += rate * h;
        if (s + 1 < S) g = posterior_mean_m1(prior, ups, gam);
    }

    // noise coefficients at the left endpoint
    double b0;
    model.drift_basis(t, a0, u, std::span<double>(&b0, 1));
    const double sig0 = model.noise(t, a0, u);
    const double sq = std::sqrt(dt);

    double acc = 0.0;
    if (grid.noise_rule == NoiseRule::lattice) {
        const double da = grid.a_axis.spacing();
        const double s_cells = sig0 * sq / da;
        const double pos_mean = grid.a_axis.position_raw(a);
        const auto rule = scratch.lattice->build(pos_mean, s_cells);
        const int na = grid.a_axis.count;
        const int nu = grid.ups_axis.count, ng = grid.gamma_axis.count;
        // gamma has no noise: clamp its position once
        double pg = grid.gamma_axis.position(gam);
        int ig = static_cast<int>(pg);
        if (ig >= ng - 1) ig = ng - 2;
        const double tg = pg - ig;
        for (int j = 0; j < rule.n; ++j) {
            if (rule.w[j] == 0.0) continue;
            long long cell = rule.cell[j];
            const double xi = (grid.a_axis.value(0) + static_cast<double>(cell) * da - a) /
                              (sig0 * sq);
            if (cell < 0) cell = 0;
            if (cell > na - 1) cell = na - 1;
            const double upsn = ups + b0 / sig0 * sq * xi;
            double pu = grid.ups_axis.position(upsn);
            int iu = static_cast<int>(pu);
            if (iu >= nu - 1) iu = nu - 2;
            const double tu = pu - iu;
            const std::size_t i00 = grid.flat(static_cast<int>(cell), iu, ig);
            const std::size_t i01 = grid.flat(static_cast<int>(cell), iu, ig + 1);
            const double v0 = w_next[i00] * (1.0 - tu) + w_next[i00 + na] * tu;
            const double v1 = w_next[i01] * (1.0 - tu) + w_next[i01 + na] * tu;
            acc += rule.w[j] * (v0 * (1.0 - tg) + v1 * tg);
        }
    } else {
        const auto& q = *scratch.hermite;
        for (std::size_t j = 0; j < q.nodes.size(); ++j) {
            const double xi = q.nodes[j];
            const double an = a + sig0 * sq * xi;
            const double upsn = ups + b0 / sig0 * sq * xi;
            acc += q.weights[j] * interp3(grid, w_next, an, upsn, gam);
        }
    }
    return run * dt + acc;
}

}  // namespace detail

// Public one-step operator: E[int k~ + w_next(X_{t+dt})] for constant
// control u started at x, with w_next given on the grid.
inline double bellman_step(const Model& model, const Prior& prior, const GridSpec& grid,
                           std::span<const double> w_next, double horizon, double t,
                           const ExtendedState& x, double u) {
    if (model.dim != 1) throw UnsupportedDimension("bellman_step: solver requires m == 1");
    const double ups = x.info.upsilon[0], gam = x.info.gamma.entries[0];
    const double g = posterior_mean_m1(prior, ups, gam);
    std::vector<double> pw;
    const double* pwp = nullptr;
    if (model.running_cost_uses_lambda) {
        pw.resize(prior.n_atoms());
        posterior_weights(prior, x.info, pw);
        pwp = pw.data();
    }
    detail::LatticeBuilder lattice((grid.quad_nodes - 1) / 2);
    QuadratureRule hermite;
    detail::StepScratch scratch{&lattice, nullptr};
    if (grid.noise_rule == NoiseRule::gauss_hermite) {
        hermite = gauss_hermite_norm(grid.quad_nodes);
        scratch.hermite = &hermite;
    }
    return detail::bellman_core(model, prior, grid, w_next, grid.dt(horizon), t, x.a, ups, gam,
                                u, g, pwp, scratch);
}

struct SolveResult {
    ValueTable value;
    FeedbackTable feedback;
};

// Full backward induction: terminal slice g~, then for each earlier dyadic
// time the pointwise min over the discretized control set; ties broken
// toward smallest |u|, then smallest u. Deterministic for any thread count.
inline SolveResult solve(const Model& model, const Prior& prior, const GridSpec& grid,
                         int n_threads = 1) {
    if (model.dim != 1) throw UnsupportedDimension("solve: requires m == 1");
    grid.validate();
    const int steps = grid.time_steps();
    const double dt = grid.dt(model.horizon);
    const std::size_t npts = grid.points();
    const int na = grid.a_axis.count, nu = grid.ups_axis.count, ng = grid.gamma_axis.count;

    SolveResult out;
    out.value.grid = grid;
    out.value.horizon = model.horizon;
    out.value.slices.assign(steps + 1, {});
    out.feedback.grid = grid;
    out.feedback.horizon = model.horizon;
    out.feedback.controls = model.control_grid();
    out.feedback.slices.assign(steps, {});
    out.value.gamma_capped =
        grid.gamma_axis.hi < grid.gamma_axis.lo + model.horizon * gamma_rate_bound(model) - 1e-12;

    const detail::PosteriorTables post = detail::PosteriorTables::build(model, prior, grid);
    detail::LatticeBuilder lattice((grid.quad_nodes - 1) / 2);
    QuadratureRule hermite;
    detail::StepScratch scratch{&lattice, nullptr};
    if (grid.noise_rule == NoiseRule::gauss_hermite) {
        hermite = gauss_hermite_norm(grid.quad_nodes);
        scratch.hermite = &hermite;
    }

    // controls in tie-break priority order: smallest |u| first, then smallest u
    const std::vector<double> controls = out.feedback.controls;
    std::vector<int> order(controls.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        const double ai = std::abs(controls[i]), aj = std::abs(controls[j]);
        if (ai != aj) return ai < aj;
        return controls[i] < controls[j];
    });

    // terminal slice
    auto& term = out.value.slices[steps];
    term.resize(npts);
    parallel_for(npts, n_threads, [&](std::size_t p) {
        const int ia = static_cast<int>(p % na);
        const int iu = static_cast<int>((p / na) % nu);
        const int ig = static_cast<int>(p / (static_cast<std::size_t>(na) * nu));
        const double y = grid.a_axis.value(ia);
        if (!model.terminal_cost_uses_lambda) {
            term[p] = model.terminal_cost(y, prior.loc(0));
        } else {
            const double* pw =
                post.weights.data() + (static_cast<std::size_t>(ig) * nu + iu) * prior.n_atoms();
            double acc = 0.0;
            for (std::size_t i = 0; i < prior.n_atoms(); ++i)
                acc += pw[i] * model.terminal_cost(y, prior.loc(i));
            term[p] = acc;
        }
    });

    for (int k = steps - 1; k >= 0; --k) {
        const double t = k * dt;
        auto& vnew = out.value.slices[k];
        auto& fnew = out.feedback.slices[k];
        vnew.resize(npts);
        fnew.resize(npts);
        const std::vector<double>& wnext = out.value.slices[k + 1];
        parallel_for(npts, n_threads, [&](std::size_t p) {
            const int ia = static_cast<int>(p % na);
            const int iu = static_cast<int>((p / na) % nu);
            const int ig = static_cast<int>(p / (static_cast<std::size_t>(na) * nu));
            const double a0 = grid.a_axis.value(ia);
            const double ups0 = grid.ups_axis.value(iu);
            const double gam0 = grid.gamma_axis.value(ig);
            const std::size_t ug = static_cast<std::size_t>(ig) * nu + iu;
            const double g_mean = post.mean[ug];
            const double* pw =
                post.have_weights ? post.weights.data() + ug * prior.n_atoms() : nullptr;
            double best = std::numeric_limits<double>::infinity();
            int best_idx = order[0];
            for (int ci : order) {
                const double val =
                    detail::bellman_core(model, prior, grid, wnext, dt, t, a0, ups0, gam0,
                                         controls[ci], g_mean, pw, scratch);
                if (val < best) {
                    best = val;
                    best_idx = ci;
                }
            }
            vnew[p] = best;
            fnew[p] = static_cast<std::uint16_t>(best_idx);
        });
        for (std::size_t p = 0; p < npts; ++p) {
            if (!std::isfinite(vnew[p])) {
                const int ia = static_cast<int>(p % na);
                const int iu = static_cast<int>((p / na) % nu);
                const int ig = static_cast<int>(p / (static_cast<std::size_t>(na) * nu));
                throw SolverError("solve: non-finite value at slice " + std::to_string(k) +
                                  " (t = " + std::to_string(t) + "), point (" +
                                  std::to_string(ia) + ", " + std::to_string(iu) + ", " +
                                  std::to_string(ig) + ")");
            }
        }
    }
    return out;
}

// Feedback lookup: floor of t to the dyadic grid, clamped multilinear
// interpolation of the stored control values, then snap to the nearest
// element of the control set. Piecewise constant in time.
inline double feedback_query(const FeedbackTable& ft, double t, double a, double ups,
                             double gam) {
    const int steps = ft.grid.time_steps();
    int k = static_cast<int>(t / ft.dt());
    if (k < 0) k = 0;
    if (k > steps - 1) k = steps - 1;
    const auto& slice = ft.slices[k];
    const GridSpec& g = ft.grid;
    const double pa = g.a_axis.position(a);
    const double pu = g.ups_axis.position(ups);
    const double pg = g.gamma_axis.position(gam);
    int ia = std::min(static_cast<int>(pa), g.a_axis.count - 2);
    int iu = std::min(static_cast<int>(pu), g.ups_axis.count - 2);
    int ig = std::min(static_cast<int>(pg), g.gamma_axis.count - 2);
    const double ta = pa - ia, tu = pu - iu, tg = pg - ig;
    double acc = 0.0;
    for (int dg = 0; dg < 2; ++dg)
        for (int du = 0; du < 2; ++du)
            for (int dda = 0; dda < 2; ++dda) {
                const double w = (dg ? tg : 1 - tg) * (du ? tu : 1 - tu) * (dda ? ta : 1 - ta);
                if (w == 0.0) continue;
                acc += w * ft.controls[slice[g.flat(ia + dda, iu + du, ig + dg)]];
            }
    // snap to the control set
    if (ft.controls.size() == 1) return ft.controls[0];
    const double c0 = ft.controls.front();
    const double dc = ft.controls[1] - ft.controls[0];
    long idx = std::lround((acc - c0) / dc);
    idx = std::clamp<long>(idx, 0, static_cast<long>(ft.controls.size()) - 1);
    return ft.controls[static_cast<std::size_t>(idx)];
}

inline Policy policy_from_table(std::shared_ptr<const FeedbackTable> ft) {
    return [ft](const ExtendedState& x) {
        return feedback_query(*ft, x.t, x.a, x.info.upsilon[0], x.info.gamma.entries[0]);
    };
}

struct HjbResidualStats {
    double max_abs = 0.0;
    double mean_abs = 0.0;
    std::size_t n_evaluated = 0;
    std::size_t n_skipped = 0;
};

// Finite-difference Hamiltonian residual of an interpolated value table at
// the given interior sample points. Points whose stencil leaves the grid
// interior are skipped and counted.
inline HjbResidualStats hjb_residual_scan(const ValueTable& vt, const Model& model,
                                          const Prior& prior,
                                          std::span<const ExtendedState> points) {
    HjbResidualStats stats;
    const GridSpec& g = vt.grid;
    const double ht = vt.dt();
    const double ha = g.a_axis.spacing(), hu = g.ups_axis.spacing(), hg = g.gamma_axis.spacing();
    double sum = 0.0;
    for (const ExtendedState& x : points) {
        const double ups = x.info.upsilon[0], gam = x.info.gamma.entries[0];
        const bool interior =
            x.t - ht >= 0.0 && x.t + ht <= vt.horizon && x.a - ha >= g.a_axis.lo &&
            x.a + ha <= g.a_axis.hi && ups - hu >= g.ups_axis.lo && ups + hu <= g.ups_axis.hi &&
            gam - hg >= g.gamma_axis.lo && gam + hg <= g.gamma_axis.hi;
        if (!interior) {
            ++stats.n_skipped;
            continue;
        }
        const auto V = [&](double dt_, double da_, double du_, double dg_) {
            return value_query(vt, x.t + dt_, x.a + da_, ups + du_, gam + dg_);
        };
        const double p_t = (V(ht, 0, 0, 0) - V(-ht, 0, 0, 0)) / (2 * ht);
        const double v0 = V(0, 0, 0, 0);
        const double qa = (V(0, ha, 0, 0) - V(0, -ha, 0, 0)) / (2 * ha);
        const double qu = (V(0, 0, hu, 0) - V(0, 0, -hu, 0)) / (2 * hu);
        const double qg = (V(0, 0, 0, hg) - V(0, 0, 0, -hg)) / (2 * hg);
        const double vaa = (V(0, ha, 0, 0) - 2 * v0 + V(0, -ha, 0, 0)) / (ha * ha);
        const double vuu = (V(0, 0, hu, 0) - 2 * v0 + V(0, 0, -hu, 0)) / (hu * hu);
        const double vau = (V(0, ha, hu, 0) - V(0, ha, -hu, 0) - V(0, -ha, hu, 0) +
                            V(0, -ha, -hu, 0)) /
                           (4 * ha * hu);
        const std::array<double, 3> grad{qa, qu, qg};
        std::array<double, 9> hess{vaa, vau, 0, vau, vuu, 0, 0, 0, 0};
        const double r = hamiltonian(model, prior, x, p_t, grad, hess);
        const double ar = std::abs(r);
        stats.max_abs = std::max(stats.max_abs, ar);
        sum += ar;
        ++stats.n_evaluated;
    }
    if (stats.n_evaluated > 0) stats.mean_abs = sum / static_cast<double>(stats.n_evaluated);
    return stats;
}

}  // namespace adc
