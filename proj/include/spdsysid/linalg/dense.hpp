#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/matrix.hpp"
#include "spdsysid/linalg/symmetric.hpp"

namespace spdsysid {

/// Lower Cholesky factor L with L·Lᵀ = m and positive diagonal.
/// @throws NotPositiveDefinite if a pivot is not positive.
inline Matrix cholesky(const SpdMatrix& spd) {
    const Matrix& m = spd.matrix();
    const std::size_t n = m.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) throw NotPositiveDefinite("Cholesky pivot " + std::to_string(j) + " is not positive");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

/// LU factorization with partial pivoting, PA = LU packed in one matrix.
class LuDecomposition {
public:
    /// @throws SingularMatrix on a (numerically) zero pivot.
    explicit LuDecomposition(Matrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
        if (!lu_.is_square()) throw DimensionMismatch("LU of a non-square matrix");
        const std::size_t n = lu_.rows();
        const double tiny = 1e-300 + 1e-15 * static_cast<double>(n) * lu_.max_abs();
        for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            for (std::size_t i = k + 1; i < n; ++i)
                if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
            if (std::abs(lu_(piv, k)) <= tiny) throw SingularMatrix("matrix is singular to working precision");
            if (piv != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
                std::swap(perm_[k], perm_[piv]);
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                const double f = lu_(i, k) / lu_(k, k);
                lu_(i, k) = f;
                if (f == 0.0) continue;
                for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
            }
        }
    }

    [[nodiscard]] Matrix solve(const Matrix& b) const {
        const std::size_t n = lu_.rows();
        if (b.rows() != n) throw DimensionMismatch("solve: right-hand side has wrong row count");
        Matrix x(n, b.cols());
        for (std::size_t c = 0; c < b.cols(); ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = b(perm_[i], c);
                for (std::size_t k = 0; k < i; ++k) s -= lu_(i, k) * x(k, c);
                x(i, c) = s;
            }
            for (std::size_t i = n; i-- > 0;) {
                double s = x(i, c);
                for (std::size_t k = i + 1; k < n; ++k) s -= lu_(i, k) * x(k, c);
                x(i, c) = s / lu_(i, i);
            }
        }
        return x;
    }

    [[nodiscard]] Matrix inverse() const { return solve(Matrix::identity(lu_.rows())); }

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
};

/// x with a·x = b.
inline Matrix solve(const Matrix& a, const Matrix& b) { return LuDecomposition(a).solve(b); }

inline Matrix inverse(const Matrix& a) { return LuDecomposition(a).inverse(); }

/// 1-norm condition number ‖a‖₁·‖a⁻¹‖₁ (exact, via the explicit inverse).
inline double condition_number(const Matrix& a) {
    try {
        const Matrix inv = inverse(a);
        return a.transpose().norm_inf() * inv.transpose().norm_inf();
    } catch (const SingularMatrix&) {
        return std::numeric_limits<double>::infinity();
    }
}

inline constexpr double max_transform_condition = 1e12;

/// P·A·P⁻¹. @throws SingularTransform when cond(P) ≥ 1e12.
inline Matrix similarity(const Matrix& a, const Matrix& p) {
    if (!a.is_square() || !p.is_square() || a.rows() != p.rows()) {
        throw DimensionMismatch("similarity: A and P must be square of equal size");
    }
    Matrix p_inv;
    try {
        p_inv = inverse(p);
    } catch (const SingularMatrix&) {
        throw SingularTransform("similarity transform is singular");
    }
    const double cond = p.transpose().norm_inf() * p_inv.transpose().norm_inf();
    if (!(cond < max_transform_condition)) throw SingularTransform("similarity transform is ill-conditioned");
    return p * a * p_inv;
}

/**
 * @brief General dense matrix exponential: scaling and squaring with a diagonal [6/6] Padé approximant.
 *
 * The matrix is scaled by 2^-s so that its infinity norm is at most 1/2, the
 * approximant N(X)/D(X) is evaluated, and the result squared s times.
 */
inline Matrix expm(const Matrix& a) {
    if (!a.is_square()) throw DimensionMismatch("expm of a non-square matrix");
    if (!a.all_finite()) throw InvalidArgument("expm of a non-finite matrix");
    const std::size_t n = a.rows();
    const double norm = a.norm_inf();
    int s = 0;
    if (norm > 0.5) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
    const Matrix x = a * std::ldexp(1.0, -s);

    constexpr int q = 6;
    Matrix num = Matrix::identity(n);
    Matrix den = Matrix::identity(n);
    Matrix power = Matrix::identity(n);
    double c = 1.0;
    for (int k = 1; k <= q; ++k) {
        c *= static_cast<double>(q - k + 1) / static_cast<double>(k * (2 * q - k + 1));
        power = power * x;
        num += c * power;
        den += ((k % 2) ? -c : c) * power;
    }
    Matrix e = solve(den, num);
    for (int k = 0; k < s; ++k) e = e * e;
    return e;
}

}  // namespace spdsysid
