#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/matrix.hpp"

namespace spdsysid {

/// Smallest eigenvalue a matrix must exceed to count as positive definite.
inline constexpr double spd_tolerance = 1e-12;

/// Square matrix with exactly equal mirrored entries. Construction symmetrizes.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(const Matrix& m) : m_(symmetric_part(m)) {
        if (!m_.all_finite()) throw InvalidArgument("symmetric matrix has non-finite entries");
    }
    SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : SymmetricMatrix(Matrix(rows)) {}

    static SymmetricMatrix identity(std::size_t n) { return SymmetricMatrix(Matrix::identity(n)); }
    static SymmetricMatrix zeros(std::size_t n) { return SymmetricMatrix(Matrix(n, n)); }
    static SymmetricMatrix diagonal(std::span<const double> d) { return SymmetricMatrix(Matrix::diagonal(d)); }
    static SymmetricMatrix diagonal(std::initializer_list<double> d) {
        return SymmetricMatrix(Matrix::diagonal(d));
    }

    [[nodiscard]] std::size_t dim() const noexcept { return m_.rows(); }
    [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    operator const Matrix&() const noexcept { return m_; }  // NOLINT(google-explicit-constructor)

    friend SymmetricMatrix operator+(const SymmetricMatrix& a, const SymmetricMatrix& b) {
        return SymmetricMatrix(a.m_ + b.m_);
    }
    friend SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b) {
        return SymmetricMatrix(a.m_ - b.m_);
    }
    friend SymmetricMatrix operator*(double s, const SymmetricMatrix& a) { return SymmetricMatrix(s * a.m_); }
    friend SymmetricMatrix operator*(const SymmetricMatrix& a, double s) { return SymmetricMatrix(s * a.m_); }
    friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

private:
    Matrix m_;
};

/// Eigenpairs of a symmetric matrix: values descending, vectors as orthonormal columns.
struct EigenDecomposition {
    std::vector<double> values;
    Matrix vectors;

    /// V·diag(f(λ))·Vᵀ
    template <typename F>
    [[nodiscard]] Matrix reconstruct(F&& f) const {
        const std::size_t n = values.size();
        Matrix out(n, n);
        for (std::size_t k = 0; k < n; ++k) {
            const double fk = f(values[k]);
            for (std::size_t i = 0; i < n; ++i) {
                const double vik = vectors(i, k) * fk;
                for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * vectors(j, k);
            }
        }
        return out;
    }
    [[nodiscard]] Matrix reconstruct() const {
        return reconstruct([](double x) { return x; });
    }
};

namespace detail {

inline constexpr int jacobi_max_sweeps = 100;

inline double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

}  // namespace detail

/**
 * @brief Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
 *
 * Each rotation annihilates one off-diagonal pair exactly; sweeps repeat until the
 * off-diagonal Frobenius norm drops below 1e-14·‖m‖_F. Eigenvalues come out sorted
 * descending and each eigenvector is sign-normalized so its largest-magnitude
 * component is positive.
 *
 * @throws ConvergenceFailure if 100 sweeps are not enough.
 */
inline EigenDecomposition eig_sym(const SymmetricMatrix& m) {
    const std::size_t n = m.dim();
    Matrix a = m.matrix();
    Matrix v = Matrix::identity(n);
    const double target = 1e-14 * a.frobenius_norm();

    int sweep = 0;
    while (detail::off_diagonal_norm(a) > target) {
        if (sweep++ >= detail::jacobi_max_sweeps) {
            throw ConvergenceFailure("Jacobi eigensolver did not converge in " +
                                     std::to_string(detail::jacobi_max_sweeps) + " sweeps");
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
                const double c = 1.0 / std::hypot(t, 1.0);
                const double s = t * c;

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = a(p, r) = c * arp - s * arq;
                    a(r, q) = a(q, r) = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.values[k] = a(src, src);
        std::size_t lead = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(v(i, src)) > std::abs(v(lead, src))) lead = i;
        const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
    }
    return out;
}

/// f applied through the spectrum: V·diag(f(λ))·Vᵀ.
template <typename F>
SymmetricMatrix spectral_map(const SymmetricMatrix& m, F&& f) {
    return SymmetricMatrix(eig_sym(m).reconstruct(std::forward<F>(f)));
}

/// Symmetric matrix whose smallest eigenvalue exceeds spd_tolerance.
class SpdMatrix {
public:
    SpdMatrix() = default;

    /// @throws NotPositiveDefinite when λ_min ≤ spd_tolerance.
    explicit SpdMatrix(SymmetricMatrix base) : base_(std::move(base)) {
        const auto eig = eig_sym(base_);
        if (eig.values.empty() || eig.values.back() <= spd_tolerance) {
            throw NotPositiveDefinite("matrix is not positive definite: smallest eigenvalue " +
                                      (eig.values.empty() ? std::string("n/a") : std::to_string(eig.values.back())));
        }
    }
    explicit SpdMatrix(const Matrix& m) : SpdMatrix(SymmetricMatrix(m)) {}

    static SpdMatrix identity(std::size_t n) { return SpdMatrix(SymmetricMatrix::identity(n)); }
    static SpdMatrix diagonal(std::initializer_list<double> d) { return SpdMatrix(SymmetricMatrix::diagonal(d)); }

    /// Construction that reports failure instead of throwing.
    static std::optional<SpdMatrix> try_make(const Matrix& m) {
        try {
            return SpdMatrix(m);
        } catch (const Error&) {
            return std::nullopt;
        }
    }

    [[nodiscard]] std::size_t dim() const noexcept { return base_.dim(); }
    [[nodiscard]] const SymmetricMatrix& symmetric() const noexcept { return base_; }
    [[nodiscard]] const Matrix& matrix() const noexcept { return base_.matrix(); }
    double operator()(std::size_t i, std::size_t j) const { return base_(i, j); }
    operator const SymmetricMatrix&() const noexcept { return base_; }  // NOLINT(google-explicit-constructor)

    friend bool operator==(const SpdMatrix&, const SpdMatrix&) = default;

private:
    SymmetricMatrix base_;
};

/**
 * @brief Matrix exponential of a symmetric matrix, evaluated spectrally.
 *
 * The exponential of a finite symmetric matrix is mathematically always SPD; in double
 * precision an eigenvalue below ln(spd_tolerance) ≈ −27.6 maps under the tolerance and
 * the result cannot be certified.
 *
 * @throws NotPositiveDefinite in that underflow case.
 */
inline SpdMatrix expm_sym(const SymmetricMatrix& m) {
    return SpdMatrix(spectral_map(m, [](double x) { return std::exp(x); }));
}

inline SymmetricMatrix logm_spd(const SpdMatrix& m) {
    return spectral_map(m.symmetric(), [](double x) { return std::log(x); });
}

inline SpdMatrix sqrtm_spd(const SpdMatrix& m) {
    return SpdMatrix(spectral_map(m.symmetric(), [](double x) { return std::sqrt(x); }));
}

inline SpdMatrix inv_sqrtm_spd(const SpdMatrix& m) {
    return SpdMatrix(spectral_map(m.symmetric(), [](double x) { return 1.0 / std::sqrt(x); }));
}

inline SpdMatrix inverse_spd(const SpdMatrix& m) {
    return SpdMatrix(spectral_map(m.symmetric(), [](double x) { return 1.0 / x; }));
}

}  // namespace spdsysid
