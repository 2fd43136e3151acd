#pragma once

// Vectorization of symmetric matrices in lower-triangular row order
// (a_11, a_21, a_22, a_31, ..., a_mm) and the quadratic form used by the
// posterior exponent. The stored entry is placed in both (i,j) and (j,i)
// when the matrix is reconstructed.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace adc {

struct SymVec {
    int dim = 0;                  // m
    std::vector<double> entries;  // m(m+1)/2 in lower-triangular row order

    SymVec() = default;
    explicit SymVec(int m) : dim(m), entries(static_cast<std::size_t>(m) * (m + 1) / 2, 0.0) {}
    SymVec(int m, std::vector<double> e) : dim(m), entries(std::move(e)) {
        if (entries.size() != static_cast<std::size_t>(m) * (m + 1) / 2)
            throw std::invalid_argument("SymVec: entry count does not match dim");
    }

    static std::size_t packed_size(int m) { return static_cast<std::size_t>(m) * (m + 1) / 2; }

    // index of (i,j) with i >= j
    static std::size_t index(int i, int j) {
        return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
    }

    double operator()(int i, int j) const {
        return i >= j ? entries[index(i, j)] : entries[index(j, i)];
    }
    double& at_lower(int i, int j) { return entries[index(i, j)]; }
};

// A is row-major m x m, symmetric within tol.
inline SymVec vectorize(std::span<const double> a, int m, double tol = 1e-12) {
    if (a.size() != static_cast<std::size_t>(m) * m)
        throw std::invalid_argument("vectorize: matrix size does not match dim");
    SymVec v(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double aij = a[static_cast<std::size_t>(i) * m + j];
            const double aji = a[static_cast<std::size_t>(j) * m + i];
            if (std::abs(aij - aji) > tol)
                throw std::invalid_argument("vectorize: input matrix is not symmetric");
            v.at_lower(i, j) = aij;
        }
    }
    return v;
}

// Reconstruct the full row-major matrix.
inline std::vector<double> unvectorize(const SymVec& v) {
    const int m = v.dim;
    std::vector<double> a(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            a[static_cast<std::size_t>(i) * m + j] = v(i, j);
    return a;
}

// ell' (Xi^-1 gamma) ell
inline double quad_form(const SymVec& gamma, std::span<const double> ell) {
    if (ell.size() != static_cast<std::size_t>(gamma.dim))
        throw std::invalid_argument("quad_form: vector length does not match dim");
    double q = 0.0;
    for (int i = 0; i < gamma.dim; ++i) {
        q += gamma(i, i) * ell[i] * ell[i];
        for (int j = 0; j < i; ++j) q += 2.0 * gamma(i, j) * ell[i] * ell[j];
    }
    return q;
}

// Information state (Upsilon, Gamma).
struct InfoState {
    std::vector<double> upsilon;  // m
    SymVec gamma;                 // m(m+1)/2

    InfoState() = default;
    explicit InfoState(int m) : upsilon(m, 0.0), gamma(m) {}
    InfoState(std::vector<double> u, SymVec g) : upsilon(std::move(u)), gamma(std::move(g)) {
        if (upsilon.size() != static_cast<std::size_t>(gamma.dim))
            throw std::invalid_argument("InfoState: upsilon length does not match gamma dim");
    }
    // m = 1 convenience
    InfoState(double ups, double gam) : upsilon{ups}, gamma(1, {gam}) {}

    int dim() const { return gamma.dim; }
};

}  // namespace adc
