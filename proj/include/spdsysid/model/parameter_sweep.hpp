#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "spdsysid/errors.hpp"
#include "spdsysid/manifold/spd_geometry.hpp"
#include "spdsysid/model/state_space.hpp"
#include "spdsysid/model/thermal_network.hpp"

namespace spdsysid::model {

enum class SweepParameter { layer_thickness, conductivity, outdoor_convection };

inline SweepParameter parse_sweep_parameter(std::string_view name) {
    if (name == "layer_thickness") return SweepParameter::layer_thickness;
    if (name == "conductivity") return SweepParameter::conductivity;
    if (name == "outdoor_convection") return SweepParameter::outdoor_convection;
    throw InvalidSpec("unsupported sweep parameter '" + std::string(name) + "'");
}

struct SweepResult {
    std::vector<double> values;
    std::vector<DiscreteLti> systems;
    /// distances[k] = affine-invariant distance between Φ_A of systems k and k+1.
    std::vector<double> distances;
};

/**
 * @brief Discretize one model per parameter value and measure how far Φ_A moves.
 *
 * Each value replaces the chosen property of `spec`; systems are built with
 * `n_nodes` nodes in canonical coordinates.
 */
inline SweepResult parameter_sweep(const MaterialSpec& spec, SweepParameter parameter, const std::vector<double>& values,
                                   std::size_t n_nodes = 2, double dt = 3600.0) {
    SweepResult out;
    out.values = values;
    std::vector<SpdMatrix> points;
    for (double v : values) {
        MaterialSpec s = spec;
        switch (parameter) {
            case SweepParameter::layer_thickness: s.layer_thickness = v; break;
            case SweepParameter::conductivity: s.conductivity = v; break;
            case SweepParameter::outdoor_convection: s.outdoor_convection = v; break;
        }
        out.systems.push_back(discretize_network(build_network(s, n_nodes), dt));
        points.emplace_back(out.systems.back().phi_a);
    }
    for (std::size_t k = 1; k < points.size(); ++k) out.distances.push_back(manifold::distance(points[k - 1], points[k]));
    return out;
}

}  // namespace spdsysid::model
