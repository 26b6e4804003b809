#pragma once

#include <complex>
#include <vector>

#include "ssid/matrix.hpp"

namespace ssid {

/// Thin SVD m = U * diag(sigma) * Vt with k = min(rows, cols) factors.
struct SvdResult {
    Matrix u;                  ///< rows x k, orthonormal columns
    std::vector<double> sigma; ///< length k, nonincreasing, nonnegative
    Matrix vt;                 ///< k x cols, orthonormal rows
};

struct Spectrum {
    std::vector<std::complex<double>> eigenvalues;
    double max_real() const;
};

/// One-sided Jacobi SVD. Accurate to machine precision for dense matrices;
/// zero singular directions get an orthonormal completion so U always has
/// orthonormal columns.
SvdResult svd(const Matrix& m);

/// Eigenvalues of a real square matrix: balancing, Householder reduction to
/// Hessenberg form, then Francis double-shift QR. Complex eigenvalues come out
/// as exact conjugate pairs.
Spectrum eigenvalues(const Matrix& m);

/// Moore-Penrose pseudo-inverse via SVD. Singular values below rcond * sigma_1
/// are treated as zero; rcond < 0 selects the default 1e-12 * max(rows, cols).
Matrix pseudo_inverse(const Matrix& m, double rcond = -1.0);

/// Determinant via LU with partial pivoting.
double determinant(const Matrix& m);

/// Spectral norm (largest singular value).
double spectral_norm(const Matrix& m);

} // namespace ssid
