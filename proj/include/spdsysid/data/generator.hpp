#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "spdsysid/data/trajectory.hpp"
#include "spdsysid/errors.hpp"
#include "spdsysid/model/state_space.hpp"
#include "spdsysid/model/thermal_network.hpp"

namespace spdsysid::data {

struct GeneratorConfig {
    std::size_t fidelity_nodes = 10;
    double noise_std = 0.05;  // K, measurement noise on observed states
    std::uint64_t seed = 0;
    double dt = 3600.0;
};

/**
 * @brief Synthetic measurements from a fine RC discretization of the layer.
 *
 * Simulates a `fidelity_nodes`-node network of `spec` under `forcing`, starting
 * with every node at the first forcing value, and observes the two boundary
 * nodes: T_ext1 (node 0, the side away from the ambient) and T_ext2 (the forced
 * node). Gaussian noise is added to the observations.
 */
inline Trajectory generate_target_data(const model::MaterialSpec& spec, const ForcingSeries& forcing,
                                       const GeneratorConfig& cfg = {}) {
    if (cfg.fidelity_nodes < 2) throw InvalidSpec("fidelity_nodes must be at least 2");
    if (cfg.noise_std < 0.0) throw InvalidArgument("noise_std must be non-negative");
    if (forcing.size() == 0) throw InvalidArgument("forcing series is empty");

    const auto net = model::build_network(spec, cfg.fidelity_nodes);
    const auto sys = model::discretize_network(net, cfg.dt);
    const std::vector<double> initial(cfg.fidelity_nodes, forcing.values.front());
    const Trajectory full = model::simulate(sys, initial, forcing);

    const std::size_t observed[2] = {0, cfg.fidelity_nodes - 1};
    Matrix states(full.states.rows(), 2);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t t = 0; t < states.rows(); ++t) {
        for (std::size_t j = 0; j < 2; ++j) {
            states(t, j) = full.states(t, observed[j]);
            if (cfg.noise_std > 0.0) states(t, j) += cfg.noise_std * noise(rng);
        }
    }
    return {std::move(states), forcing, {"T_ext1", "T_ext2"}};
}

struct DatasetSplit {
    Trajectory train;
    Trajectory test;
    double split_fraction = 0.7;
};

/// Contiguous split at round(fraction·N) transitions; the boundary state is shared.
/// @throws TooShort if either part has fewer than 2 transitions.
inline DatasetSplit split(const Trajectory& traj, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("split fraction must lie in (0, 1)");
    const std::size_t n = traj.length();
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (k < 2 || n - std::min(k, n) < 2) throw TooShort("split leaves fewer than 2 samples on one side");
    return {traj.slice(0, k), traj.slice(k, n), fraction};
}

}  // namespace spdsysid::data
