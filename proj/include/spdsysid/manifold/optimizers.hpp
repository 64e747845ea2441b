#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/matrix.hpp"
#include "spdsysid/linalg/symmetric.hpp"
#include "spdsysid/manifold/spd_geometry.hpp"

namespace spdsysid::manifold {

struct AdamHyperparameters {
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
        if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
            throw InvalidArgument("Adam decay rates must lie in (0, 1)");
        }
        if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    }
};

/**
 * @brief Moments of Riemannian Adam on the SPD manifold.
 *
 * The first moment is a symmetric matrix (tangent spaces are all Sym(n), so it is
 * carried between base points unchanged). The second moment is a scalar: the
 * running average of the squared affine-invariant norm of the gradient.
 */
struct RAdamState {
    SymmetricMatrix first_moment;
    double second_moment = 0.0;
    std::uint64_t step_count = 0;
    AdamHyperparameters hyper;

    static RAdamState zero(std::size_t dim, AdamHyperparameters h = {}) {
        h.validate();
        return {SymmetricMatrix::zeros(dim), 0.0, 0, h};
    }
};

/**
 * @brief One Riemannian Adam step.
 *
 * r = X·sym(G)·X;  m ← β₁m + (1−β₁)r;  v ← β₂v + (1−β₂)‖r‖²_X;
 * X ← Exp_X(−η·m̂/(√v̂ + ε)) with m̂, v̂ bias-corrected.
 */
inline std::pair<SpdMatrix, RAdamState> radam_step(const SpdMatrix& x, const Matrix& g_euc, RAdamState state) {
    if (state.first_moment.dim() != x.dim()) throw DimensionMismatch("optimizer state does not match the point");
    const auto& h = state.hyper;
    const TangentVector r = euclidean_to_riemannian_grad(x, g_euc);

    state.step_count += 1;
    state.first_moment = h.beta1 * state.first_moment + (1.0 - h.beta1) * r.direction;
    state.second_moment = h.beta2 * state.second_moment + (1.0 - h.beta2) * squared_norm(r);

    const double t = static_cast<double>(state.step_count);
    const double m_corr = 1.0 / (1.0 - std::pow(h.beta1, t));
    const double v_hat = state.second_moment / (1.0 - std::pow(h.beta2, t));
    const double scale = -h.learning_rate * m_corr / (std::sqrt(v_hat) + h.epsilon);

    const SymmetricMatrix step = scale * state.first_moment;
    if (step.matrix().max_abs() == 0.0) return {x, std::move(state)};
    return {exp_map(x, TangentVector(x, step)), std::move(state)};
}

/// Elementwise Adam moments for a matrix parameter.
struct AdamState {
    Matrix first_moment;
    Matrix second_moment;
    std::uint64_t step_count = 0;
    AdamHyperparameters hyper;

    static AdamState zero(std::size_t rows, std::size_t cols, AdamHyperparameters h = {}) {
        h.validate();
        return {Matrix(rows, cols), Matrix(rows, cols), 0, h};
    }
};

inline std::pair<Matrix, AdamState> euclid_adam_step(Matrix x, const Matrix& g, AdamState state) {
    if (g.rows() != x.rows() || g.cols() != x.cols() || state.first_moment.rows() != x.rows() ||
        state.first_moment.cols() != x.cols()) {
        throw DimensionMismatch("Adam: parameter, gradient and state shapes differ");
    }
    const auto& h = state.hyper;
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double m_corr = 1.0 / (1.0 - std::pow(h.beta1, t));
    const double v_corr = 1.0 / (1.0 - std::pow(h.beta2, t));

    auto m = state.first_moment.data();
    auto v = state.second_moment.data();
    auto p = x.data();
    auto gd = g.data();
    for (std::size_t k = 0; k < p.size(); ++k) {
        m[k] = h.beta1 * m[k] + (1.0 - h.beta1) * gd[k];
        v[k] = h.beta2 * v[k] + (1.0 - h.beta2) * gd[k] * gd[k];
        p[k] -= h.learning_rate * (m[k] * m_corr) / (std::sqrt(v[k] * v_corr) + h.epsilon);
    }
    return {std::move(x), std::move(state)};
}

}  // namespace spdsysid::manifold
