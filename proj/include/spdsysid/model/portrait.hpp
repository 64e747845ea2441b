#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/symmetric.hpp"
#include "spdsysid/model/state_space.hpp"

namespace spdsysid::model {

struct PortraitGrid {
    double x_min = -1.0;
    double x_max = 1.0;
    double y_min = -1.0;
    double y_max = 1.0;
    std::size_t resolution = 21;  // points per axis
};

struct FieldSample {
    double x, y, dx, dy;
};

/// Real eigendirection v (unit length) with its eigenvalue; the flow along it is λ·v.
struct EigenRay {
    double eigenvalue;
    double vx, vy;
};

struct PhasePortrait {
    std::vector<FieldSample> field;
    std::vector<EigenRay> rays;
};

namespace detail {

/// Real eigenpairs of a 2×2 matrix; empty when the pair is complex.
inline std::vector<EigenRay> real_eigen_rays_2x2(const Matrix& a) {
    if (a.is_symmetric()) {
        const auto eig = eig_sym(SymmetricMatrix(a));
        return {{eig.values[0], eig.vectors(0, 0), eig.vectors(1, 0)},
                {eig.values[1], eig.vectors(0, 1), eig.vectors(1, 1)}};
    }
    const double tr = a.trace();
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double disc = tr * tr - 4.0 * det;
    if (disc < 0.0) return {};
    std::vector<EigenRay> rays;
    for (double sign : {1.0, -1.0}) {
        const double lambda = 0.5 * (tr + sign * std::sqrt(disc));
        // (A − λI)v = 0: pick the better-conditioned row.
        double vx = a(0, 1), vy = lambda - a(0, 0);
        if (std::hypot(vx, vy) < std::hypot(lambda - a(1, 1), a(1, 0))) {
            vx = lambda - a(1, 1);
            vy = a(1, 0);
        }
        double norm = std::hypot(vx, vy);
        if (norm == 0.0) {
            vx = sign > 0 ? 1.0 : 0.0;
            vy = sign > 0 ? 0.0 : 1.0;
            norm = 1.0;
        }
        rays.push_back({lambda, vx / norm, vy / norm});
    }
    return rays;
}

inline std::vector<double> axis(double lo, double hi, std::size_t n) {
    if (n == 1) return {0.5 * (lo + hi)};
    std::vector<double> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return pts;
}

}  // namespace detail

/// Unforced flow (T, A·T) on a regular grid plus the real eigendirections of A.
/// @throws UnsupportedDimension unless the system has exactly two states.
inline PhasePortrait phase_portrait(const ContinuousLti& sys, const PortraitGrid& grid) {
    if (sys.state_dim() != 2 || !sys.a.is_square()) throw UnsupportedDimension("phase portraits need a 2-state system");
    if (grid.resolution == 0) throw InvalidArgument("portrait resolution must be at least 1");
    if (!(grid.x_max >= grid.x_min) || !(grid.y_max >= grid.y_min)) throw InvalidArgument("portrait bounds are inverted");

    PhasePortrait out;
    const auto xs = detail::axis(grid.x_min, grid.x_max, grid.resolution);
    const auto ys = detail::axis(grid.y_min, grid.y_max, grid.resolution);
    out.field.reserve(xs.size() * ys.size());
    for (double y : ys) {
        for (double x : xs) {
            out.field.push_back({x, y, sys.a(0, 0) * x + sys.a(0, 1) * y, sys.a(1, 0) * x + sys.a(1, 1) * y});
        }
    }
    out.rays = detail::real_eigen_rays_2x2(sys.a);
    return out;
}

}  // namespace spdsysid::model
