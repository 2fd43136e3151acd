#pragma once

// Space-time grid for the backward-induction solver (m = 1): dyadic time
// steps, three uniform spatial axes (a, upsilon, gamma), and clamped
// multilinear interpolation. Value slices are stored a-fastest.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "adc/model.hpp"

namespace adc {

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int count = 2;

    double spacing() const { return (hi - lo) / (count - 1); }

    // continuous cell position, clamped to [0, count-1]
    double position(double x) const {
        const double p = (x - lo) / spacing();
        if (p <= 0.0) return 0.0;
        const double pmax = static_cast<double>(count - 1);
        return p >= pmax ? pmax : p;
    }
    // unclamped cell position
    double position_raw(double x) const { return (x - lo) / spacing(); }

    double value(int i) const { return lo + spacing() * i; }

    void validate(const char* name) const {
        if (count < 2) throw std::invalid_argument(std::string(name) + ": count must be >= 2");
        if (!(hi > lo)) throw std::invalid_argument(std::string(name) + ": hi must exceed lo");
    }
};

enum class NoiseRule { lattice, gauss_hermite };

struct GridSpec {
    int n_dyadic = 7;  // time steps = 2^n, step T 2^-n
    Axis a_axis{-4.0, 4.0, 97};
    Axis ups_axis{-8.0, 8.0, 33};
    Axis gamma_axis{0.0, 16.0, 17};
    int quad_nodes = 9;
    int substeps = 1;
    NoiseRule noise_rule = NoiseRule::lattice;

    int time_steps() const { return 1 << n_dyadic; }
    double dt(double horizon) const { return horizon / time_steps(); }

    std::size_t points() const {
        return static_cast<std::size_t>(a_axis.count) * ups_axis.count * gamma_axis.count;
    }
    std::size_t flat(int ia, int iu, int ig) const {
        return (static_cast<std::size_t>(ig) * ups_axis.count + iu) * a_axis.count + ia;
    }

    void validate() const {
        if (n_dyadic < 0 || n_dyadic > 24) throw std::invalid_argument("GridSpec: bad n_dyadic");
        a_axis.validate("a_axis");
        ups_axis.validate("ups_axis");
        gamma_axis.validate("gamma_axis");
        if (gamma_axis.lo < 0.0)
            throw std::invalid_argument("GridSpec: gamma_axis.min must be >= 0");
        if (quad_nodes < 1 || quad_nodes > 63)
            throw std::invalid_argument("GridSpec: quad_nodes out of range");
        if (substeps < 1) throw std::invalid_argument("GridSpec: substeps must be >= 1");
    }
};

// Largest one-step Gamma increment rate max_u b^2/sigma^2, sampled over the
// control grid at a few state points; used to size the gamma axis so that
// Gamma cannot exit the box from gamma_axis.lo over one horizon.
inline double gamma_rate_bound(const Model& model) {
    double worst = 0.0;
    for (double u : model.control_grid()) {
        for (double y : {model.horizon * 0.0, 1.0, -1.0, 2.0, -2.0}) {
            for (double t : {0.0, 0.5 * model.horizon, model.horizon}) {
                double b;
                model.drift_basis(t, y, u, std::span<double>(&b, 1));
                const double sig = model.noise(t, y, u);
                worst = std::max(worst, b * b / (sig * sig));
            }
        }
    }
    return worst;
}

// Clamped multilinear interpolation on one slice (values laid out a-fastest).
inline double interp3(const GridSpec& g, std::span<const double> v, double a, double ups,
                      double gam) {
    const double pa = g.a_axis.position(a);
    const double pu = g.ups_axis.position(ups);
    const double pg = g.gamma_axis.position(gam);
    int ia = static_cast<int>(pa), iu = static_cast<int>(pu), ig = static_cast<int>(pg);
    if (ia >= g.a_axis.count - 1) ia = g.a_axis.count - 2;
    if (iu >= g.ups_axis.count - 1) iu = g.ups_axis.count - 2;
    if (ig >= g.gamma_axis.count - 1) ig = g.gamma_axis.count - 2;
    const double ta = pa - ia, tu = pu - iu, tg = pg - ig;
    double acc = 0.0;
    for (int dg = 0; dg < 2; ++dg) {
        const double wg = dg ? tg : 1.0 - tg;
        if (wg == 0.0) continue;
        for (int du = 0; du < 2; ++du) {
            const double wu = du ? tu : 1.0 - tu;
            if (wu == 0.0) continue;
            const std::size_t base = g.flat(ia, iu + du, ig + dg);
            acc += wg * wu * ((1.0 - ta) * v[base] + ta * v[base + 1]);
        }
    }
    return acc;
}

struct ValueTable {
    GridSpec grid;
    double horizon = 1.0;
    bool gamma_capped = false;  // true if one-step Gamma moves can clamp at gamma_axis.hi
    std::vector<std::vector<double>> slices;  // time_steps()+1 slices

    double dt() const { return grid.dt(horizon); }
};

struct FeedbackTable {
    GridSpec grid;
    double horizon = 1.0;
    std::vector<double> controls;                    // discretized control set
    std::vector<std::vector<std::uint16_t>> slices;  // time_steps() slices

    double dt() const { return grid.dt(horizon); }
};

// Multilinear in space on the two neighboring dyadic slices, linear in t.
inline double value_query(const ValueTable& vt, double t, double a, double ups, double gam) {
    const int steps = vt.grid.time_steps();
    double pos = t / vt.dt();
    if (pos <= 0.0) pos = 0.0;
    if (pos >= steps) pos = steps;
    int k = static_cast<int>(pos);
    if (k >= steps) k = steps - 1;
    const double th = pos - k;
    const double v0 = interp3(vt.grid, vt.slices[k], a, ups, gam);
    if (th == 0.0) return v0;
    const double v1 = interp3(vt.grid, vt.slices[k + 1], a, ups, gam);
    return v0 * (1.0 - th) + v1 * th;
}

inline double value_query(const ValueTable& vt, const ExtendedState& x) {
    return value_query(vt, x.t, x.a, x.info.upsilon[0], x.info.gamma.entries[0]);
}

}  // namespace adc
