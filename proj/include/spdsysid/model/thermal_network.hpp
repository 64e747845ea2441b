#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/matrix.hpp"

namespace spdsysid::model {

/// Physical and thermophysical properties of a homogeneous wall layer (SI units).
struct MaterialSpec {
    double volume = 0.0;               // m³
    double layer_thickness = 0.0;      // m
    double conductivity = 0.0;         // W/mK
    double density = 0.0;              // kg/m³
    double specific_heat = 0.0;        // J/kgK
    double outdoor_convection = 0.0;   // W/m²K
    double air_density = 0.0;          // kg/m³
    double air_specific_heat = 0.0;    // J/kgK

    /// Properties the measurement data is generated from.
    static MaterialSpec target() { return {1.8, 0.2, 0.72, 1920.0, 780.0, 25.0, 1.2, 100.0}; }
    /// Deliberately wrong properties used for the physics initial guess.
    static MaterialSpec misspecified() { return {3.6, 0.4, 0.2, 1920.0, 780.0, 20.0, 1.2, 100.0}; }

    void validate() const {
        const auto check = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw InvalidSpec(std::string("material property '") + name + "' must be finite and positive");
            }
        };
        check(volume, "volume");
        check(layer_thickness, "layer_thickness");
        check(conductivity, "conductivity");
        check(density, "density");
        check(specific_heat, "specific_heat");
        check(outdoor_convection, "outdoor_convection");
        check(air_density, "air_density");
        check(air_specific_heat, "air_specific_heat");
    }

    [[nodiscard]] double area() const { return volume / layer_thickness; }

    friend bool operator==(const MaterialSpec&, const MaterialSpec&) = default;
};

/**
 * @brief Lumped-parameter chain of nodes: C_j dT_j/dt = Σ_k (T_k − T_j)/R_k.
 *
 * Node k connects to node k+1 through internode_resistances[k]; the forced node
 * also connects to the ambient temperature through ambient_resistance.
 */
struct ThermalNetwork {
    std::vector<double> capacitances;          // J/K
    std::vector<double> internode_resistances; // K/W, size n-1
    double ambient_resistance = 0.0;           // K/W
    std::size_t forced_node = 0;

    [[nodiscard]] std::size_t n_nodes() const noexcept { return capacitances.size(); }

    void validate() const {
        if (capacitances.size() < 2) throw InvalidSpec("a thermal network needs at least two nodes");
        if (internode_resistances.size() + 1 != capacitances.size()) {
            throw InvalidSpec("a chain of n nodes needs n-1 internode resistances");
        }
        for (double c : capacitances)
            if (!(c > 0.0) || !std::isfinite(c)) throw InvalidSpec("capacitances must be positive");
        for (double r : internode_resistances)
            if (!(r > 0.0) || !std::isfinite(r)) throw InvalidSpec("resistances must be positive");
        if (!(ambient_resistance > 0.0) || !std::isfinite(ambient_resistance)) {
            throw InvalidSpec("ambient resistance must be positive");
        }
        if (forced_node >= capacitances.size()) throw InvalidSpec("forced node index out of range");
    }

    /// Symmetric conductance matrix G: chain Laplacian plus 1/R_ext on the forced node's diagonal.
    [[nodiscard]] Matrix conductance() const {
        validate();
        const std::size_t n = n_nodes();
        Matrix g(n, n);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double u = 1.0 / internode_resistances[k];
            g(k, k) += u;
            g(k + 1, k + 1) += u;
            g(k, k + 1) -= u;
            g(k + 1, k) -= u;
        }
        g(forced_node, forced_node) += 1.0 / ambient_resistance;
        return g;
    }
};

/**
 * @brief Discretize a layer into n equal slabs.
 *
 * a = V/L, Δx = L/n, R = Δx/(k·a), C_j = ρ·c·V/n, R_ext = 1/(h·a). The ambient
 * side is the last node.
 */
inline ThermalNetwork build_network(const MaterialSpec& spec, std::size_t n_nodes) {
    spec.validate();
    if (n_nodes < 2) throw InvalidSpec("n_nodes must be at least 2");
    const double area = spec.area();
    const double dx = spec.layer_thickness / static_cast<double>(n_nodes);
    ThermalNetwork net;
    net.capacitances.assign(n_nodes, spec.density * spec.specific_heat * spec.volume / static_cast<double>(n_nodes));
    net.internode_resistances.assign(n_nodes - 1, dx / (spec.conductivity * area));
    net.ambient_resistance = 1.0 / (spec.outdoor_convection * area);
    net.forced_node = n_nodes - 1;
    return net;
}

}  // namespace spdsysid::model
