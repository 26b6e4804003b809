#include "ssid/pod.hpp"

#include <cmath>

#include "ssid/linalg.hpp"

namespace ssid {

namespace {

PodBasis build_basis(const SvdResult& f, std::size_t r) {
    PodBasis basis;
    basis.sigma_all = f.sigma;
    basis.r = r;
    basis.ur = Matrix(f.u.rows(), r);
    for (std::size_t i = 0; i < f.u.rows(); ++i)
        for (std::size_t j = 0; j < r; ++j) basis.ur(i, j) = f.u(i, j);
    double total = 0.0, kept = 0.0;
    for (std::size_t i = 0; i < f.sigma.size(); ++i) {
        const double e = f.sigma[i] * f.sigma[i];
        total += e;
        if (i < r) kept += e;
    }
    basis.energy_captured = total > 0.0 ? kept / total : 1.0;
    basis.tail_bound = 0.0;
    for (std::size_t i = r; i < f.sigma.size(); ++i) basis.tail_bound += f.sigma[i];
    return basis;
}

} // namespace

PodBasis fit_pod(const Matrix& x, const PodCriterion& criterion) {
    if (x.rows() == 0 || x.cols() == 0) throw DimensionError("fit_pod: empty snapshot matrix");
    const SvdResult f = svd(x);
    const std::size_t k = f.sigma.size();

    std::size_t r = 0;
    if (const auto* rank = std::get_if<RankCriterion>(&criterion)) {
        if (rank->r == 0 || rank->r > k)
            throw ConfigError("fit_pod: rank must be in [1, min(n, N)]");
        r = rank->r;
    } else {
        const double eta = std::get<EnergyCriterion>(criterion).eta;
        if (!(eta > 0.0) || eta > 1.0) throw ConfigError("fit_pod: energy threshold must be in (0, 1]");
        double total = 0.0;
        for (double s : f.sigma) total += s * s;
        double kept = 0.0;
        r = k;
        for (std::size_t i = 0; i < k; ++i) {
            kept += f.sigma[i] * f.sigma[i];
            if (total == 0.0 || kept >= eta * total) {
                r = i + 1;
                break;
            }
        }
    }
    return build_basis(f, r);
}

PodBasis fit_pod(const SnapshotSet& data, const PodCriterion& criterion) {
    return fit_pod(data.stacked_states(), criterion);
}

Matrix project(const PodBasis& basis, const Matrix& x) {
    if (x.rows() != basis.ur.rows())
        throw DimensionError("project: row dimension does not match basis");
    return mul_tn(basis.ur, x);
}

Matrix lift(const PodBasis& basis, const Matrix& xr) {
    if (xr.rows() != basis.r) throw DimensionError("lift: row dimension does not match basis rank");
    return basis.ur * xr;
}

SnapshotSet project(const PodBasis& basis, const SnapshotSet& data) {
    data.validate();
    SnapshotSet reduced;
    reduced.trajectories.reserve(data.trajectories.size());
    for (const auto& t : data.trajectories) {
        Trajectory rt;
        rt.grid = t.grid;
        rt.states = project(basis, t.states);
        rt.inputs = t.inputs;
        if (t.derivatives) rt.derivatives = project(basis, *t.derivatives);
        reduced.trajectories.push_back(std::move(rt));
    }
    return reduced;
}

} // namespace ssid
