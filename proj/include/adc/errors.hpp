#pragma once

#include <stdexcept>
#include <string>

namespace adc {

// Exponent stabilization was not enough; the result is not representable.
class NumericOverflow : public std::runtime_error {
public:
    explicit NumericOverflow(const std::string& what) : std::runtime_error(what) {}
};

// Operation is only defined for one-dimensional hidden parameters.
class UnsupportedDimension : public std::runtime_error {
public:
    explicit UnsupportedDimension(const std::string& what) : std::runtime_error(what) {}
};

// Requested posterior moments cannot be realized by any information state.
class InfeasibleTarget : public std::runtime_error {
public:
    explicit InfeasibleTarget(const std::string& what) : std::runtime_error(what) {}
};

// Backward induction produced a non-finite value.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace adc
