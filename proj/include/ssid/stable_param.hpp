#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "ssid/matrix.hpp"

namespace ssid {

/// Trainable parameterization of a stable system matrix. The assembled
/// A = (Jbar - Jbar^T - Rbar*Rbar^T) * Qbar*Qbar^T has all eigenvalues in the
/// closed left half-plane for any parameter values.
struct StableParams {
    Matrix jbar;
    Matrix rbar;
    Matrix qbar;
    std::optional<Matrix> bbar;

    std::size_t dim() const { return jbar.rows(); }
    std::size_t input_dim() const { return bbar ? bbar->cols() : 0; }
    void validate() const;
};

enum class Provenance { StableParameterized, Unconstrained };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct LinearModel {
    Matrix a;
    std::optional<Matrix> b;
    Provenance provenance = Provenance::Unconstrained;

    std::size_t dim() const { return a.rows(); }
    std::size_t input_dim() const { return b ? b->cols() : 0; }
};

/// Skew/PSD/PSD factors: J = Jbar - Jbar^T, R = Rbar*Rbar^T, Q = Qbar*Qbar^T.
struct StableParts {
    Matrix j;
    Matrix r;
    Matrix q;
};

/// Build the guaranteed-stable model A = (J - R) Q; B is passed through.
LinearModel assemble(const StableParams& p);

StableParts decompose_parts(const StableParams& p);

/// V(x) = 1/2 x^T Q x with Q = Qbar*Qbar^T. Nonnegative for all x.
double lyapunov_value(const StableParams& p, std::span<const double> x);

/// dV/dt along the flow: x^T Q A x. Nonpositive up to roundoff.
double lyapunov_rate(const StableParams& p, std::span<const double> x);

/// Entries i.i.d. N(0, std^2) from a seeded generator; m > 0 adds an n x m
/// input matrix Bbar.
StableParams init_params(std::size_t n, std::size_t m, std::uint64_t seed, double std = 0.1);

} // namespace ssid
