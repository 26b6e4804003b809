#pragma once

#include <variant>
#include <vector>

#include "ssid/matrix.hpp"
#include "ssid/snapshots.hpp"

namespace ssid {

/// Truncated POD basis from the SVD of the stacked snapshot matrix.
struct PodBasis {
    Matrix ur;                     ///< n x r, orthonormal columns
    std::vector<double> sigma_all; ///< all min(n, N) singular values
    std::size_t r = 0;
    double energy_captured = 0.0; ///< sum_{i<=r} sigma_i^2 / sum_i sigma_i^2
    double tail_bound = 0.0;      ///< sum_{i>r} sigma_i

    std::size_t full_dim() const { return ur.rows(); }
};

struct RankCriterion {
    std::size_t r;
};
struct EnergyCriterion {
    double eta; ///< in (0, 1]
};
using PodCriterion = std::variant<RankCriterion, EnergyCriterion>;

PodBasis fit_pod(const SnapshotSet& data, const PodCriterion& criterion);
PodBasis fit_pod(const Matrix& x, const PodCriterion& criterion);

/// Xr = Ur^T X
Matrix project(const PodBasis& basis, const Matrix& x);
/// X~ = Ur Xr
Matrix lift(const PodBasis& basis, const Matrix& xr);

/// Project every trajectory (states and derivatives; inputs pass through).
SnapshotSet project(const PodBasis& basis, const SnapshotSet& data);

} // namespace ssid
