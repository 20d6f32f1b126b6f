#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ifslab {

// State of the chain; dimension is fixed per model.
using StateVector = std::vector<double>;

inline double dist(const StateVector& a, const StateVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double norm(const StateVector& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

inline bool all_finite(const StateVector& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

struct ModelDefinitionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitDegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ifslab
