#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spdsysid/data/trajectory.hpp"
#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/dense.hpp"
#include "spdsysid/linalg/symmetric.hpp"
#include "spdsysid/manifold/optimizers.hpp"
#include "spdsysid/model/state_space.hpp"
#include "spdsysid/sysid/loss.hpp"

namespace spdsysid::sysid {

enum class Method { riemannian, euclidean, cholesky };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::riemannian: return "riemannian";
        case Method::euclidean: return "euclidean";
        case Method::cholesky: return "cholesky";
    }
    return "unknown";
}

inline Method parse_method(std::string_view s) {
    if (s == "riemannian") return Method::riemannian;
    if (s == "euclidean") return Method::euclidean;
    if (s == "cholesky") return Method::cholesky;
    throw InvalidArgument("unknown fit method '" + std::string(s) + "'");
}

struct FitConfig {
    Method method = Method::riemannian;
    std::size_t epochs = 2000;
    double learning_rate_a = 1e-3;
    double learning_rate_b = 1e-3;
    std::uint64_t seed = 0;
    /// Stop once the relative per-epoch improvement stays below this for `patience` epochs.
    double loss_tolerance = 1e-10;
    std::size_t patience = 50;
    /// When set, FitResult::epochs_to_threshold reports the first epoch with loss ≤ threshold.
    std::optional<double> threshold;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (epochs < 1) throw InvalidArgument("epochs must be at least 1");
        if (!(learning_rate_a > 0.0) || !(learning_rate_b > 0.0)) throw InvalidArgument("learning rates must be positive");
        if (!(loss_tolerance >= 0.0)) throw InvalidArgument("loss tolerance must be non-negative");
        hyper(learning_rate_a).validate();
    }

    [[nodiscard]] manifold::AdamHyperparameters hyper(double lr) const { return {lr, beta1, beta2, epsilon}; }
};

struct FitResult {
    Method method = Method::riemannian;
    std::uint64_t seed = 0;
    Matrix phi_a_hat;
    /// Whether phi_a_hat is symmetric and passes SPD construction. Guaranteed for riemannian/cholesky.
    bool phi_a_spd = false;
    Matrix phi_b_hat;
    double initial_loss = 0.0;
    /// loss_trace[e] is the loss after e+1 updates.
    std::vector<double> loss_trace;
    std::optional<std::size_t> epochs_to_threshold;
    model::DiscreteLti initial_model;

    [[nodiscard]] double final_loss() const { return loss_trace.empty() ? initial_loss : loss_trace.back(); }

    /// Fitted matrices in the initial model's frame and time step.
    [[nodiscard]] model::DiscreteLti model() const {
        return {phi_a_hat, phi_b_hat, initial_model.dt, initial_model.frame};
    }
};

/// Epochs needed for a trace to reach `threshold` (0 if the initial loss already does).
inline std::optional<std::size_t> epochs_to_reach(double initial_loss, const std::vector<double>& trace,
                                                  double threshold) {
    if (initial_loss <= threshold) return 0;
    for (std::size_t e = 0; e < trace.size(); ++e)
        if (trace[e] <= threshold) return e + 1;
    return std::nullopt;
}

/// True when m is exactly symmetric and passes SPD construction.
inline bool is_spd(const Matrix& m) { return m.is_square() && m.is_symmetric() && SpdMatrix::try_make(m).has_value(); }

struct FitIterate {
    std::size_t epoch;  // 1-based count of completed updates
    const Matrix& phi_a;
    const Matrix& phi_b;
    double loss;
};

/// Called once per epoch from the fitting thread.
using FitObserver = std::function<void(const FitIterate&)>;

namespace detail {

/// Optimizer for Φ_A under one of the three parameterizations.
class PhiAUpdater {
public:
    PhiAUpdater(Method method, const Matrix& init, const manifold::AdamHyperparameters& h) : method_(method) {
        const std::size_t n = init.rows();
        switch (method) {
            case Method::riemannian:
                point_ = SpdMatrix(init);
                radam_ = manifold::RAdamState::zero(n, h);
                value_ = point_.matrix();
                break;
            case Method::euclidean:
                value_ = init;
                adam_ = manifold::AdamState::zero(n, n, h);
                break;
            case Method::cholesky:
                factor_ = cholesky(SpdMatrix(init));
                adam_ = manifold::AdamState::zero(n, n, h);
                value_ = factor_ * factor_.transpose();
                break;
        }
    }

    [[nodiscard]] const Matrix& value() const noexcept { return value_; }

    void step(const Matrix& grad) {
        switch (method_) {
            case Method::riemannian: {
                auto [next, state] = manifold::radam_step(point_, grad, std::move(radam_));
                point_ = std::move(next);
                radam_ = std::move(state);
                value_ = point_.matrix();
                break;
            }
            case Method::euclidean: {
                auto [next, state] = manifold::euclid_adam_step(std::move(value_), grad, std::move(adam_));
                value_ = std::move(next);
                adam_ = std::move(state);
                break;
            }
            case Method::cholesky: {
                // Φ_A = L·Lᵀ ⇒ ∂J/∂L = (G + Gᵀ)·L, kept lower triangular.
                Matrix g_l = (grad + grad.transpose()) * factor_;
                for (std::size_t i = 0; i < g_l.rows(); ++i)
                    for (std::size_t j = i + 1; j < g_l.cols(); ++j) g_l(i, j) = 0.0;
                auto [next, state] = manifold::euclid_adam_step(std::move(factor_), g_l, std::move(adam_));
                factor_ = std::move(next);
                adam_ = std::move(state);
                value_ = symmetric_part(factor_ * factor_.transpose());
                break;
            }
        }
    }

private:
    Method method_;
    Matrix value_;
    SpdMatrix point_;
    manifold::RAdamState radam_;
    Matrix factor_;
    manifold::AdamState adam_;
};

}  // namespace detail

/**
 * @brief Fit (Φ_A, Φ_B) to a trajectory by full-batch gradient descent on the one-step loss.
 *
 * The trajectory is given in physical temperatures and mapped into `init`'s
 * frame. Φ_A follows the configured method (Riemannian Adam on the SPD manifold,
 * elementwise Adam, or Adam on a Cholesky factor); Φ_B always uses elementwise
 * Adam. Both are updated simultaneously from the same gradient evaluation.
 *
 * @throws NonFiniteLoss if the loss becomes NaN or infinite.
 */
inline FitResult fit(const model::DiscreteLti& init, const Trajectory& traj, const FitConfig& cfg,
                     const FitObserver& observer = {}) {
    cfg.validate();
    init.validate();
    if (traj.state_dim() != init.state_dim()) throw DimensionMismatch("trajectory does not match the model");
    if (cfg.method != Method::euclidean && !is_spd(init.phi_a)) {
        throw NotPositiveDefinite("initial phi_a must be symmetric positive definite for this method");
    }
    const Trajectory working = init.frame.to_working(traj);

    FitResult result;
    result.method = cfg.method;
    result.seed = cfg.seed;
    result.initial_model = init;
    result.loss_trace.reserve(cfg.epochs);

    detail::PhiAUpdater phi_a(cfg.method, init.phi_a, cfg.hyper(cfg.learning_rate_a));
    Matrix phi_b = init.phi_b;
    auto adam_b = manifold::AdamState::zero(phi_b.rows(), phi_b.cols(), cfg.hyper(cfg.learning_rate_b));

    LossGradient lg = loss_and_grad(phi_a.value(), phi_b, working);
    result.initial_loss = lg.loss;
    if (!std::isfinite(lg.loss)) throw NonFiniteLoss("initial loss is not finite", {});

    std::size_t stalled = 0;
    double previous = lg.loss;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        phi_a.step(lg.d_phi_a);
        auto [next_b, state_b] = manifold::euclid_adam_step(std::move(phi_b), lg.d_phi_b, std::move(adam_b));
        phi_b = std::move(next_b);
        adam_b = std::move(state_b);

        lg = loss_and_grad(phi_a.value(), phi_b, working);
        if (!std::isfinite(lg.loss)) {
            throw NonFiniteLoss("loss became non-finite at epoch " + std::to_string(epoch), result.loss_trace);
        }
        result.loss_trace.push_back(lg.loss);
        if (observer) observer({epoch, phi_a.value(), phi_b, lg.loss});

        const double improvement = previous > 0.0 ? (previous - lg.loss) / previous : 0.0;
        stalled = improvement < cfg.loss_tolerance ? stalled + 1 : 0;
        previous = lg.loss;
        if (cfg.patience > 0 && stalled >= cfg.patience) break;
    }

    result.phi_a_hat = phi_a.value();
    result.phi_b_hat = phi_b;
    result.phi_a_spd = is_spd(result.phi_a_hat);
    if (cfg.threshold) result.epochs_to_threshold = epochs_to_reach(result.initial_loss, result.loss_trace, *cfg.threshold);
    return result;
}

/// Free-running rollout of the fitted model from a physical initial state.
inline Trajectory predict(const FitResult& result, const std::vector<double>& initial_state, const ForcingSeries& forcing,
                          std::vector<std::string> labels = {}) {
    return model::simulate(result.model(), initial_state, forcing, std::move(labels));
}

}  // namespace spdsysid::sysid
