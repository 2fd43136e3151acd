#pragma once

// Gauss-Legendre and Gauss-Hermite rules (Newton iteration on the
// recurrences), plus raw moments of the standard normal.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace adc {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Nodes/weights for \int_lo^hi f(x) dx.
inline QuadratureRule gauss_legendre(int n, double lo, double hi) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int mid = (n + 1) / 2;
    for (int i = 0; i < mid; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = x;
        r.weights[i] = w;
        r.nodes[n - 1 - i] = -x;
        r.weights[n - 1 - i] = w;
    }
    // map [-1,1] -> [lo,hi]
    const double h = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = m - h * r.nodes[i];
        r.weights[i] *= h;
    }
    return r;
}

// Probabilists' Hermite rule: E[f(Z)] ~ sum_i w_i f(x_i), Z ~ N(0,1).
// Weights are normalized to sum to one.
inline QuadratureRule gauss_hermite_norm(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite_norm: n must be >= 1");
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int mid = (n + 1) / 2;
    for (int i = 0; i < mid; ++i) {
        // initial guesses per Numerical Recipes (physicists' convention)
        double x;
        if (i == 0)
            x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            x = r.nodes[0] - 1.14 * std::pow(static_cast<double>(n), 0.426) / r.nodes[0];
        else if (i == 2)
            x = 1.86 * r.nodes[1] - 0.86 * r.nodes[0];
        else if (i == 3)
            x = 1.91 * r.nodes[2] - 0.91 * r.nodes[1];
        else
            x = 2.0 * r.nodes[i - 1] - r.nodes[i - 2];
        double dp = 0.0;
        const double norm0 = std::pow(M_PI, -0.25);
        for (int it = 0; it < 200; ++it) {
            double p0 = norm0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = x * std::sqrt(2.0 / (k + 1.0)) * p0 -
                                  std::sqrt(static_cast<double>(k) / (k + 1.0)) * p1;
                p1 = p0;
                p0 = p2;
            }
            dp = std::sqrt(2.0 * n) * p1;
            const double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = x;  // store physicists' nodes descending
        r.weights[i] = 2.0 / (dp * dp);
        r.nodes[n - 1 - i] = -x;
        r.weights[n - 1 - i] = r.weights[i];
    }
    // convert to probabilists' (x*sqrt(2)) and normalize weights
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    for (int i = 0; i < n; ++i) {
        r.nodes[i] *= std::sqrt(2.0);
        r.weights[i] /= wsum;
    }
    return r;
}

// E[Z^k] for Z ~ N(0,1), k = 0..kmax.
inline std::vector<double> normal_moments(int kmax) {
    std::vector<double> m(kmax + 1, 0.0);
    m[0] = 1.0;
    for (int k = 2; k <= kmax; ++k) m[k] = (k - 1) * m[k - 2];
    return m;
}

}  // namespace adc
