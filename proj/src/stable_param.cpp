#include "ssid/stable_param.hpp"

#include "ssid/rng.hpp"

namespace ssid {

void StableParams::validate() const {
    const std::size_t n = jbar.rows();
    if (jbar.cols() != n || rbar.rows() != n || rbar.cols() != n || qbar.rows() != n ||
        qbar.cols() != n)
        throw DimensionError("StableParams: Jbar, Rbar, Qbar must be square with equal dimension");
    if (bbar && bbar->rows() != n)
        throw DimensionError("StableParams: Bbar row count must match state dimension");
    if (!jbar.all_finite() || !rbar.all_finite() || !qbar.all_finite() ||
        (bbar && !bbar->all_finite()))
        throw NumericalError("StableParams: parameters contain NaN or Inf");
}

std::string to_string(Provenance p) {
    return p == Provenance::StableParameterized ? "stable-parameterized" : "unconstrained";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "stable-parameterized") return Provenance::StableParameterized;
    if (s == "unconstrained") return Provenance::Unconstrained;
    throw IoError("unknown provenance: " + s);
}

LinearModel assemble(const StableParams& p) {
    p.validate();
    const std::size_t n = p.dim();
    // W = Jbar - Jbar^T - Rbar*Rbar^T
    Matrix w = mul_nt(p.rbar, p.rbar);
    w *= -1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w(i, j) += p.jbar(i, j) - p.jbar(j, i);
    Matrix q = mul_nt(p.qbar, p.qbar);
    LinearModel model{w * q, p.bbar, Provenance::StableParameterized};
    return model;
}

StableParts decompose_parts(const StableParams& p) {
    p.validate();
    const std::size_t n = p.dim();
    StableParts parts{Matrix(n, n), mul_nt(p.rbar, p.rbar), mul_nt(p.qbar, p.qbar)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) parts.j(i, j) = p.jbar(i, j) - p.jbar(j, i);
    return parts;
}

double lyapunov_value(const StableParams& p, std::span<const double> x) {
    p.validate();
    if (x.size() != p.dim()) throw DimensionError("lyapunov_value: state dimension mismatch");
    // 1/2 x^T Qbar Qbar^T x = 1/2 ||Qbar^T x||^2
    const std::size_t n = p.dim();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p.qbar(i, j) * x[i];
        sum += s * s;
    }
    return 0.5 * sum;
}

double lyapunov_rate(const StableParams& p, std::span<const double> x) {
    p.validate();
    if (x.size() != p.dim()) throw DimensionError("lyapunov_rate: state dimension mismatch");
    const LinearModel model = assemble(p);
    const Matrix q = mul_nt(p.qbar, p.qbar);
    const std::vector<double> ax = matvec(model.a, x);
    const std::vector<double> qx = matvec(q, x);
    return dot(qx, ax);
}

StableParams init_params(std::size_t n, std::size_t m, std::uint64_t seed, double std) {
    if (n == 0) throw ConfigError("init_params: state dimension must be >= 1");
    if (std <= 0.0) throw ConfigError("init_params: std must be positive");
    Rng rng(seed);
    auto fill = [&](Matrix& mat) {
        for (std::size_t i = 0; i < mat.rows(); ++i)
            for (std::size_t j = 0; j < mat.cols(); ++j) mat(i, j) = rng.normal(0.0, std);
    };
    StableParams p{Matrix(n, n), Matrix(n, n), Matrix(n, n), std::nullopt};
    fill(p.jbar);
    fill(p.rbar);
    fill(p.qbar);
    if (m > 0) {
        p.bbar = Matrix(n, m);
        fill(*p.bbar);
    }
    return p;
}

} // namespace ssid
