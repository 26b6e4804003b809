#pragma once

#include <cstdint>
#include <vector>

#include "ssid/snapshots.hpp"
#include "ssid/stable_param.hpp"

namespace ssid {

/// Analytic transporting-flow field sampled on a square grid: the state stacks
/// the x-velocity over the flattened grid, then the y-velocity.
struct TransportFlowSpec {
    std::size_t grid_points_per_axis = 200;
    std::size_t times = 100;
    double t_end = 5.0;
    bool with_derivatives = false;

    static constexpr double domain_min = -1.5;
    static constexpr double domain_max = 1.5;
    void validate() const;
};

/// Viscous Burgers problem v_t + v v_z = mu v_zz on (0, 1) with homogeneous
/// Neumann boundaries and v0(z) = 1 + sin((2 f z + 1) pi), one trajectory per
/// frequency f.
struct BurgersSpec {
    std::size_t grid_points = 1000;
    double viscosity = 0.01;
    double horizon = 1.0;
    std::size_t samples = 500;
    std::vector<double> frequencies = default_frequencies();
    bool with_derivatives = false;

    static std::vector<double> default_frequencies(); ///< 1.0, 1.25, ..., 5.0
    static std::vector<double> test_frequencies();    ///< 1.75, 2.75, 3.75
    void validate() const;
};

/// Seeded random stable system A = (J - R) Q with min eig(R) >= spectral_margin
/// and Q positive definite, so max Re(eig A) < 0. m_inputs > 0 adds a random B.
LinearModel gen_stable_lti(std::size_t n, std::uint64_t seed, double spectral_margin,
                           std::size_t m_inputs = 0);

SnapshotSet gen_transport_flow(const TransportFlowSpec& spec);

SnapshotSet gen_burgers(const BurgersSpec& spec);

/// Additive i.i.d. Gaussian noise on the states with std = sigma_rel times the
/// RMS of all state entries.
SnapshotSet add_noise(const SnapshotSet& data, double sigma_rel, std::uint64_t seed);

/// Seeded sinusoidal input signal on a grid: each channel amp*sin(w t + phi)
/// with w, phi drawn per channel.
InputSignal gen_sinusoid_inputs(std::size_t m, const TimeGrid& grid, std::uint64_t seed,
                                double amplitude = 1.0);

} // namespace ssid
