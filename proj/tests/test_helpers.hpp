#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "ssid/linalg.hpp"
#include "ssid/matrix.hpp"
#include "ssid/rng.hpp"

namespace ssid::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double std = 1.0) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, std);
    return m;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
    Matrix d = a;
    d -= b;
    const double den = std::max(1e-300, b.frobenius_norm());
    return d.frobenius_norm() / den;
}

/// Smallest real part over the spectrum of a symmetric matrix.
inline double min_symmetric_eig(const Matrix& m) {
    const Spectrum s = eigenvalues(m);
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& ev : s.eigenvalues) lo = std::min(lo, ev.real());
    return lo;
}

} // namespace ssid::testing
