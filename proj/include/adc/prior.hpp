#pragma once

// Finitely supported (or quadrature-discretized) law of the hidden drift
// parameter. Continuous priors are discretized once, up front, so that all
// posterior integrals become exact finite sums over the atoms.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "adc/quadrature.hpp"

namespace adc {

class Prior {
public:
    // locs: n_atoms x dim, row-major. Weights must be positive and sum to 1.
    Prior(int dim, std::vector<double> locs, std::vector<double> weights)
        : dim_(dim), loc_(std::move(locs)), weight_(std::move(weights)) {
        validate();
        bound_ = 0.0;
        for (std::size_t i = 0; i < n_atoms(); ++i) {
            double n2 = 0.0;
            for (int d = 0; d < dim_; ++d) n2 += loc(i)[d] * loc(i)[d];
            bound_ = std::max(bound_, std::sqrt(n2));
        }
        log_weight_.resize(weight_.size());
        for (std::size_t i = 0; i < weight_.size(); ++i) log_weight_[i] = std::log(weight_[i]);
    }

    // One-dimensional discrete prior from (location, weight) pairs.
    static Prior discrete(const std::vector<std::pair<double, double>>& atoms) {
        std::vector<double> l, w;
        l.reserve(atoms.size());
        w.reserve(atoms.size());
        for (const auto& [x, p] : atoms) {
            l.push_back(x);
            w.push_back(p);
        }
        return Prior(1, std::move(l), std::move(w));
    }

    static Prior point_mass(double x) { return discrete({{x, 1.0}}); }

    // U[lo,hi] discretized by Gauss-Legendre quadrature.
    static Prior uniform(double lo, double hi, int nodes = 64) {
        if (!(hi > lo)) throw std::invalid_argument("Prior::uniform: hi must exceed lo");
        QuadratureRule q = gauss_legendre(nodes, lo, hi);
        double wsum = 0.0;
        for (double w : q.weights) wsum += w;
        for (double& w : q.weights) w /= wsum;
        return Prior(1, std::move(q.nodes), std::move(q.weights));
    }

    int dim() const { return dim_; }
    std::size_t n_atoms() const { return weight_.size(); }
    double bound() const { return bound_; }  // K

    std::span<const double> loc(std::size_t i) const {
        return {loc_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    double loc1(std::size_t i) const { return loc_[i]; }  // dim == 1
    double weight(std::size_t i) const { return weight_[i]; }
    double log_weight(std::size_t i) const { return log_weight_[i]; }
    std::span<const double> weights() const { return weight_; }

    std::vector<double> mean() const {
        std::vector<double> m(dim_, 0.0);
        for (std::size_t i = 0; i < n_atoms(); ++i)
            for (int d = 0; d < dim_; ++d) m[d] += weight_[i] * loc(i)[d];
        return m;
    }
    double mean1() const { return mean()[0]; }

    double min_loc1() const {
        double v = loc_[0];
        for (std::size_t i = 1; i < n_atoms(); ++i) v = std::min(v, loc_[i]);
        return v;
    }
    double max_loc1() const {
        double v = loc_[0];
        for (std::size_t i = 1; i < n_atoms(); ++i) v = std::max(v, loc_[i]);
        return v;
    }

private:
    void validate() const {
        if (dim_ < 1) throw std::invalid_argument("Prior: dim must be positive");
        if (weight_.empty()) throw std::invalid_argument("Prior: at least one atom required");
        if (loc_.size() != weight_.size() * static_cast<std::size_t>(dim_))
            throw std::invalid_argument("Prior: locations/weights size mismatch");
        double sum = 0.0;
        for (double w : weight_) {
            if (!(w > 0.0)) throw std::invalid_argument("Prior: weights must be strictly positive");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("Prior: weights must sum to 1 within 1e-12");
    }

    int dim_;
    std::vector<double> loc_;
    std::vector<double> weight_;
    std::vector<double> log_weight_;
    double bound_ = 0.0;
};

}  // namespace adc
