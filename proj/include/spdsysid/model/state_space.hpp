#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "spdsysid/data/trajectory.hpp"
#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/dense.hpp"
#include "spdsysid/linalg/matrix.hpp"
#include "spdsysid/linalg/symmetric.hpp"
#include "spdsysid/model/thermal_network.hpp"

namespace spdsysid::model {

/// dT/dt = A·T + B·U
struct ContinuousLti {
    Matrix a;  // 1/s
    Matrix b;  // 1/s

    [[nodiscard]] std::size_t state_dim() const noexcept { return a.rows(); }
    [[nodiscard]] std::size_t input_dim() const noexcept { return b.cols(); }
};

/**
 * @brief Map between physical temperatures and the coordinates a model works in.
 *
 * Working state z = P·(T − offset·1), working input w = U − offset. The identity
 * frame (P = I, offset 0) means the model acts on raw temperatures.
 */
struct CoordinateFrame {
    Matrix transform;     // P, n×n
    double offset = 0.0;  // K

    static CoordinateFrame identity(std::size_t n) { return {Matrix::identity(n), 0.0}; }

    [[nodiscard]] std::vector<double> to_working(std::span<const double> t) const {
        std::vector<double> shifted(t.begin(), t.end());
        for (double& x : shifted) x -= offset;
        return transform * shifted;
    }
    [[nodiscard]] std::vector<double> to_physical(std::span<const double> z) const {
        const Matrix t = solve(transform, Matrix::column(z));
        std::vector<double> out = t.col(0);
        for (double& x : out) x += offset;
        return out;
    }
    [[nodiscard]] double input_to_working(double u) const { return u - offset; }

    [[nodiscard]] Trajectory to_working(const Trajectory& traj) const {
        Matrix s(traj.states.rows(), traj.states.cols());
        for (std::size_t t = 0; t < s.rows(); ++t) {
            const auto z = to_working(traj.state(t));
            for (std::size_t j = 0; j < z.size(); ++j) s(t, j) = z[j];
        }
        ForcingSeries f = traj.forcing;
        for (double& u : f.values) u = input_to_working(u);
        return {std::move(s), std::move(f), traj.labels};
    }
    [[nodiscard]] Trajectory to_physical(const Trajectory& traj) const {
        Matrix s(traj.states.rows(), traj.states.cols());
        for (std::size_t t = 0; t < s.rows(); ++t) {
            const auto x = to_physical(traj.state(t));
            for (std::size_t j = 0; j < x.size(); ++j) s(t, j) = x[j];
        }
        ForcingSeries f = traj.forcing;
        for (double& u : f.values) u += offset;
        return {std::move(s), std::move(f), traj.labels};
    }
};

/// T_{t+1} = Φ_A·T_t + Φ_B·U_t in the model's working frame, sampled every dt seconds.
struct DiscreteLti {
    Matrix phi_a;
    Matrix phi_b;
    double dt = 3600.0;
    CoordinateFrame frame;

    [[nodiscard]] std::size_t state_dim() const noexcept { return phi_a.rows(); }

    void validate() const {
        if (!phi_a.is_square() || phi_b.rows() != phi_a.rows() || phi_b.cols() != 1) {
            throw DimensionMismatch("discrete model needs square phi_a and a single-input phi_b");
        }
        if (frame.transform.rows() != phi_a.rows() || !frame.transform.is_square()) {
            throw DimensionMismatch("coordinate transform does not match the state dimension");
        }
        if (!phi_a.all_finite() || !phi_b.all_finite()) throw InvalidArgument("model matrices must be finite");
        if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    }
};

/// A = −C⁻¹G with B = e_f/(R_ext·C_f) on the forced node.
inline ContinuousLti assemble_continuous(const ThermalNetwork& net) {
    const Matrix g = net.conductance();
    const std::size_t n = net.n_nodes();
    ContinuousLti sys{Matrix(n, n), Matrix(n, 1)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sys.a(i, j) = -g(i, j) / net.capacitances[i];
    sys.b(net.forced_node, 0) = 1.0 / (net.ambient_resistance * net.capacitances[net.forced_node]);
    return sys;
}

/**
 * @brief Symmetrizing change of coordinates P = (C/C̄)^{1/2}, C̄ the mean capacitance.
 *
 * Ã = P·A·P⁻¹ = −C^{-1/2}·G·C^{-1/2} is exactly symmetric; B̃ = P·B. The scalar
 * normalization cancels in Ã and keeps states in kelvin when all capacitances
 * are equal (then P = I).
 */
inline std::pair<ContinuousLti, Matrix> canonical_coordinates(const ContinuousLti& sys, const ThermalNetwork& net) {
    const std::size_t n = net.n_nodes();
    if (sys.state_dim() != n || sys.b.rows() != n) throw DimensionMismatch("system does not match the network");
    const Matrix g = net.conductance();
    const double mean_c = std::accumulate(net.capacitances.begin(), net.capacitances.end(), 0.0) / static_cast<double>(n);

    std::vector<double> p_diag(n);
    for (std::size_t i = 0; i < n; ++i) p_diag[i] = std::sqrt(net.capacitances[i] / mean_c);

    ContinuousLti out{Matrix(n, n), Matrix(n, sys.input_dim())};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.a(i, j) = -g(i, j) / std::sqrt(net.capacitances[i] * net.capacitances[j]);
        }
        for (std::size_t k = 0; k < sys.input_dim(); ++k) out.b(i, k) = p_diag[i] * sys.b(i, k);
    }
    return {std::move(out), Matrix::diagonal(p_diag)};
}

/**
 * @brief Zero-order-hold discretization.
 *
 * Φ_B is the top-right block of expm([[A, B], [0, 0]]·dt), which equals
 * A⁻¹(e^{A·dt} − I)B for invertible A and dt·B for A = 0. Φ_A comes from the
 * spectral exponential when A is symmetric, otherwise from the same block
 * exponential.
 */
inline DiscreteLti discretize(const ContinuousLti& sys, double dt, CoordinateFrame frame = {}) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
    const std::size_t n = sys.state_dim();
    const std::size_t m = sys.input_dim();
    if (!sys.a.is_square() || sys.b.rows() != n) throw DimensionMismatch("A and B shapes are inconsistent");

    Matrix aug(n + m, n + m);
    aug.set_block(0, 0, sys.a * dt);
    aug.set_block(0, n, sys.b * dt);
    const Matrix e = expm(aug);

    DiscreteLti out;
    out.dt = dt;
    out.phi_b = e.block(0, n, n, m);
    if (sys.a.is_symmetric()) {
        out.phi_a = eig_sym(SymmetricMatrix(sys.a * dt)).reconstruct([](double l) { return std::exp(l); });
        out.phi_a = symmetric_part(out.phi_a);
    } else {
        out.phi_a = e.block(0, 0, n, n);
    }
    out.frame = frame.transform.rows() == n ? std::move(frame) : CoordinateFrame::identity(n);
    return out;
}

/// Discretized model of a network in canonical coordinates, frame carrying P.
inline DiscreteLti discretize_network(const ThermalNetwork& net, double dt, double offset = 0.0) {
    auto [canon, p] = canonical_coordinates(assemble_continuous(net), net);
    return discretize(canon, dt, CoordinateFrame{std::move(p), offset});
}

/**
 * @brief Free-running rollout T_{t+1} = Φ_A·T_t + Φ_B·U_t.
 *
 * Inputs and outputs are physical temperatures; the model's frame is applied on
 * the way in and undone on the way out.
 */
inline Trajectory simulate(const DiscreteLti& sys, std::span<const double> initial_state, const ForcingSeries& forcing,
                           std::vector<std::string> labels = {}) {
    sys.validate();
    const std::size_t n = sys.state_dim();
    if (initial_state.size() != n) throw DimensionMismatch("initial state has the wrong dimension");

    Matrix working(forcing.size() + 1, n);
    std::vector<double> z = sys.frame.to_working(initial_state);
    for (std::size_t j = 0; j < n; ++j) working(0, j) = z[j];
    std::vector<double> next(n);
    for (std::size_t t = 0; t < forcing.size(); ++t) {
        const double w = sys.frame.input_to_working(forcing.values[t]);
        for (std::size_t i = 0; i < n; ++i) {
            double s = sys.phi_b(i, 0) * w;
            for (std::size_t j = 0; j < n; ++j) s += sys.phi_a(i, j) * z[j];
            next[i] = s;
        }
        z.swap(next);
        for (std::size_t j = 0; j < n; ++j) working(t + 1, j) = z[j];
    }

    Matrix states(working.rows(), n);
    const bool identity_frame = sys.frame.transform == Matrix::identity(n);
    for (std::size_t t = 0; t < working.rows(); ++t) {
        if (identity_frame) {
            for (std::size_t j = 0; j < n; ++j) states(t, j) = working(t, j) + sys.frame.offset;
        } else {
            std::vector<double> row(n);
            for (std::size_t j = 0; j < n; ++j) row[j] = working(t, j);
            const auto x = sys.frame.to_physical(row);
            for (std::size_t j = 0; j < n; ++j) states(t, j) = x[j];
        }
    }
    return {std::move(states), forcing, std::move(labels)};
}

inline Trajectory simulate(const DiscreteLti& sys, const std::vector<double>& initial_state,
                           const ForcingSeries& forcing, std::vector<std::string> labels = {}) {
    return simulate(sys, std::span<const double>(initial_state), forcing, std::move(labels));
}

}  // namespace spdsysid::model
