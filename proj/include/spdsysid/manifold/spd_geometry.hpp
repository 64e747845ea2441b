#pragma once

#include <cmath>
#include <utility>

#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/dense.hpp"
#include "spdsysid/linalg/symmetric.hpp"

// Geometry of the SPD manifold under the affine-invariant metric
//   <U, V>_X = tr(X⁻¹ U X⁻¹ V).
// Every tangent space is Sym(n), so tangent directions are stored as plain
// symmetric matrices tagged with their base point.

namespace spdsysid::manifold {

struct TangentVector {
    SpdMatrix at;
    SymmetricMatrix direction;

    TangentVector(SpdMatrix base, SymmetricMatrix dir) : at(std::move(base)), direction(std::move(dir)) {
        if (at.dim() != direction.dim()) throw DimensionMismatch("tangent direction does not match base point");
    }
};

namespace detail {

/// X^{1/2} and X^{-1/2} from one eigendecomposition.
struct SqrtPair {
    Matrix sqrt;
    Matrix inv_sqrt;
};

inline SqrtPair sqrt_pair(const SpdMatrix& x) {
    const auto eig = eig_sym(x.symmetric());
    return {eig.reconstruct([](double l) { return std::sqrt(l); }),
            eig.reconstruct([](double l) { return 1.0 / std::sqrt(l); })};
}

/// X^{-1/2} Y X^{-1/2}, the point Y seen from X.
inline SymmetricMatrix whiten(const SqrtPair& xs, const Matrix& y) {
    return SymmetricMatrix(xs.inv_sqrt * y * xs.inv_sqrt);
}

}  // namespace detail

/// Exp_X(V) = X^{1/2}·expm(X^{-1/2} V X^{-1/2})·X^{1/2}.
/// @throws NotPositiveDefinite only if the step drives an eigenvalue below spd_tolerance in floating point.
inline SpdMatrix exp_map(const SpdMatrix& x, const TangentVector& v) {
    if (v.at.dim() != x.dim() || relative_difference(v.at.matrix(), x.matrix()) > 1e-12) {
        throw InvalidArgument("tangent vector is not based at the given point");
    }
    const auto xs = detail::sqrt_pair(x);
    const auto inner = spectral_map(detail::whiten(xs, v.direction), [](double l) { return std::exp(l); });
    return SpdMatrix(xs.sqrt * inner.matrix() * xs.sqrt);
}

/// Log_X(Y) = X^{1/2}·logm(X^{-1/2} Y X^{-1/2})·X^{1/2}.
inline TangentVector log_map(const SpdMatrix& x, const SpdMatrix& y) {
    if (x.dim() != y.dim()) throw DimensionMismatch("log_map: dimensions differ");
    const auto xs = detail::sqrt_pair(x);
    const auto inner = spectral_map(detail::whiten(xs, y.matrix()), [](double l) { return std::log(l); });
    return {x, SymmetricMatrix(xs.sqrt * inner.matrix() * xs.sqrt)};
}

/// Point at fraction s along the geodesic from x (s = 0) to y (s = 1).
inline SpdMatrix geodesic(const SpdMatrix& x, const SpdMatrix& y, double s) {
    if (x.dim() != y.dim()) throw DimensionMismatch("geodesic: dimensions differ");
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("geodesic parameter must lie in [0, 1]");
    if (s == 0.0) return x;
    if (s == 1.0) return y;
    const auto xs = detail::sqrt_pair(x);
    const auto inner = spectral_map(detail::whiten(xs, y.matrix()), [s](double l) { return std::pow(l, s); });
    return SpdMatrix(xs.sqrt * inner.matrix() * xs.sqrt);
}

/// Affine-invariant geodesic distance ‖logm(X^{-1/2} Y X^{-1/2})‖_F.
inline double distance(const SpdMatrix& x, const SpdMatrix& y) {
    if (x.dim() != y.dim()) throw DimensionMismatch("distance: dimensions differ");
    const auto xs = detail::sqrt_pair(x);
    double s = 0.0;
    for (double l : eig_sym(detail::whiten(xs, y.matrix())).values) s += std::log(l) * std::log(l);
    return std::sqrt(s);
}

/// ⟨U, V⟩_X = tr(X⁻¹ U X⁻¹ V)
inline double inner_product(const SpdMatrix& x, const SymmetricMatrix& u, const SymmetricMatrix& v) {
    const Matrix x_inv = inverse_spd(x).matrix();
    return (x_inv * u.matrix() * x_inv * v.matrix()).trace();
}

inline double squared_norm(const TangentVector& v) { return inner_product(v.at, v.direction, v.direction); }

/// Riemannian gradient X·sym(G)·X of a function whose Euclidean gradient at X is G.
inline TangentVector euclidean_to_riemannian_grad(const SpdMatrix& x, const Matrix& g_euc) {
    if (g_euc.rows() != x.dim() || g_euc.cols() != x.dim()) {
        throw DimensionMismatch("gradient shape does not match the base point");
    }
    return {x, SymmetricMatrix(x.matrix() * symmetric_part(g_euc) * x.matrix())};
}

}  // namespace spdsysid::manifold
