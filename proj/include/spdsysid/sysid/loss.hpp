#pragma once

#include <cstddef>

#include "spdsysid/data/trajectory.hpp"
#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/matrix.hpp"

namespace spdsysid::sysid {

struct LossGradient {
    double loss = 0.0;
    Matrix d_phi_a;  // ∂J/∂Φ_A
    Matrix d_phi_b;  // ∂J/∂Φ_B
};

namespace detail {

inline void check_dims(const Matrix& phi_a, const Matrix& phi_b, const Trajectory& traj) {
    const std::size_t n = traj.state_dim();
    if (phi_a.rows() != n || phi_a.cols() != n || phi_b.rows() != n || phi_b.cols() != 1) {
        throw DimensionMismatch("model matrices do not match the trajectory's state dimension");
    }
    if (traj.length() < 1) throw DimensionMismatch("loss needs at least one transition");
}

template <bool WithGradient>
LossGradient evaluate(const Matrix& phi_a, const Matrix& phi_b, const Trajectory& traj) {
    check_dims(phi_a, phi_b, traj);
    const std::size_t n = traj.state_dim();
    LossGradient out{0.0, Matrix(n, n), Matrix(n, 1)};
    std::vector<double> r(n);
    for (std::size_t t = 0; t < traj.length(); ++t) {
        const double u = traj.forcing.values[t];
        for (std::size_t i = 0; i < n; ++i) {
            double s = phi_b(i, 0) * u - traj.states(t + 1, i);
            for (std::size_t j = 0; j < n; ++j) s += phi_a(i, j) * traj.states(t, j);
            r[i] = s;
            out.loss += s * s;
        }
        if constexpr (WithGradient) {
            for (std::size_t i = 0; i < n; ++i) {
                const double two_r = 2.0 * r[i];
                for (std::size_t j = 0; j < n; ++j) out.d_phi_a(i, j) += two_r * traj.states(t, j);
                out.d_phi_b(i, 0) += two_r * u;
            }
        }
    }
    return out;
}

}  // namespace detail

/// J = Σ_t ‖Φ_A·T_t + Φ_B·U_t − T_{t+1}‖², the one-step prediction error.
inline double loss(const Matrix& phi_a, const Matrix& phi_b, const Trajectory& traj) {
    return detail::evaluate<false>(phi_a, phi_b, traj).loss;
}

/// J with ∂J/∂Φ_A = 2Σ r_t T_tᵀ and ∂J/∂Φ_B = 2Σ r_t U_t, r_t the residual.
inline LossGradient loss_and_grad(const Matrix& phi_a, const Matrix& phi_b, const Trajectory& traj) {
    return detail::evaluate<true>(phi_a, phi_b, traj);
}

}  // namespace spdsysid::sysid
