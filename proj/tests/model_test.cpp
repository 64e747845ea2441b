#include <gtest/gtest.h>

#include <cmath>

#include "spdsysid/linalg/dense.hpp"
#include "spdsysid/manifold/spd_geometry.hpp"
#include "spdsysid/model/parameter_sweep.hpp"
#include "spdsysid/model/portrait.hpp"
#include "spdsysid/model/state_space.hpp"
#include "spdsysid/model/thermal_network.hpp"
#include "support/test_support.hpp"

using namespace spdsysid;
using namespace spdsysid::model;
using spdsysid::testing::Rng;

namespace {

MaterialSpec random_spec(Rng& rng) {
    std::uniform_real_distribution<double> u(0.5, 2.0);
    const MaterialSpec t = MaterialSpec::target();
    return {t.volume * u(rng),        t.layer_thickness * u(rng), t.conductivity * u(rng), t.density * u(rng),
            t.specific_heat * u(rng), t.outdoor_convection * u(rng), t.air_density,        t.air_specific_heat};
}

ThermalNetwork two_node(double c1, double c2, double r12, double r_ext) {
    return {{c1, c2}, {r12}, r_ext, 1};
}

ForcingSeries constant_forcing(std::size_t n, double value) { return {0, std::vector<double>(n, value)}; }

}  // namespace

TEST(BuildNetwork, TargetSpecHandValues) {
    const auto net = build_network(MaterialSpec::target(), 2);
    EXPECT_DOUBLE_EQ(MaterialSpec::target().area(), 9.0);
    ASSERT_EQ(net.n_nodes(), 2u);
    EXPECT_NEAR(net.internode_resistances[0], 0.1 / (0.72 * 9.0), 1e-18);
    EXPECT_NEAR(net.internode_resistances[0], 1.5432e-2, 1e-6);
    EXPECT_NEAR(net.capacitances[0], 1.34784e6, 1e-6);
    EXPECT_NEAR(net.capacitances[1], 1.34784e6, 1e-6);
    EXPECT_NEAR(net.ambient_resistance, 1.0 / 225.0, 1e-18);
    EXPECT_EQ(net.forced_node, 1u);
}

TEST(BuildNetwork, MisspecifiedSpecHandValues) {
    // a = 3.6/0.4 = 9, Δx = 0.2, R = 0.2/(0.2·9), C = 1920·780·1.8, R_ext = 1/(20·9)
    const auto net = build_network(MaterialSpec::misspecified(), 2);
    EXPECT_NEAR(net.internode_resistances[0], 1.0 / 9.0, 1e-15);
    EXPECT_NEAR(net.capacitances[0], 2695680.0, 1e-6);
    EXPECT_NEAR(net.ambient_resistance, 1.0 / 180.0, 1e-18);
}

TEST(BuildNetwork, DoublingNodesHalvesSlabs) {
    const auto a = build_network(MaterialSpec::target(), 3);
    const auto b = build_network(MaterialSpec::target(), 6);
    EXPECT_NEAR(b.capacitances[0], a.capacitances[0] / 2.0, 1e-9);
    EXPECT_NEAR(b.internode_resistances[0], a.internode_resistances[0] / 2.0, 1e-18);
    EXPECT_EQ(b.ambient_resistance, a.ambient_resistance);
    EXPECT_EQ(b.forced_node, 5u);
}

TEST(BuildNetwork, RejectsInvalidInput) {
    EXPECT_THROW(build_network(MaterialSpec::target(), 1), InvalidSpec);
    for (double MaterialSpec::*field : {&MaterialSpec::volume, &MaterialSpec::layer_thickness, &MaterialSpec::conductivity,
                                        &MaterialSpec::density, &MaterialSpec::specific_heat,
                                        &MaterialSpec::outdoor_convection}) {
        MaterialSpec s = MaterialSpec::target();
        s.*field = 0.0;
        EXPECT_THROW(build_network(s, 2), InvalidSpec);
        s.*field = -1.0;
        EXPECT_THROW(build_network(s, 2), InvalidSpec);
    }
}

TEST(AssembleContinuous, TwoNodeLayout) {
    const double c1 = 2.0, c2 = 5.0, r12 = 0.25, r_ext = 0.5;
    const auto sys = assemble_continuous(two_node(c1, c2, r12, r_ext));
    const double u12 = 1.0 / r12, u2e = 1.0 / r_ext;
    EXPECT_DOUBLE_EQ(sys.a(0, 0), -u12 / c1);
    EXPECT_DOUBLE_EQ(sys.a(0, 1), u12 / c1);
    EXPECT_DOUBLE_EQ(sys.a(1, 0), u12 / c2);
    EXPECT_DOUBLE_EQ(sys.a(1, 1), -(u12 + u2e) / c2);
    EXPECT_EQ(sys.b(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(sys.b(1, 0), u2e / c2);
}

TEST(AssembleContinuous, EqualCapacitancesGiveSymmetricA) {
    EXPECT_TRUE(assemble_continuous(build_network(MaterialSpec::target(), 5)).a.is_symmetric());
}

TEST(AssembleContinuous, ConductanceStructure) {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto net = build_network(random_spec(rng), 2 + trial % 9);
        const Matrix g = net.conductance();
        EXPECT_TRUE(g.is_symmetric());
        for (std::size_t i = 0; i < g.rows(); ++i) {
            double off = 0.0;
            for (std::size_t j = 0; j < g.cols(); ++j)
                if (j != i) off += std::abs(g(i, j));
            if (i == net.forced_node) {
                EXPECT_GT(g(i, i), off * (1.0 + 1e-12));
            } else {
                EXPECT_NEAR(g(i, i), off, 1e-12 * g(i, i));
            }
        }
    }
}

TEST(AssembleContinuous, AlwaysHurwitz) {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto net = build_network(random_spec(rng), 2 + trial % 9);
        const auto [canon, p] = canonical_coordinates(assemble_continuous(net), net);
        EXPECT_LT(eig_sym(SymmetricMatrix(canon.a)).values.front(), 0.0);
    }
}

TEST(CanonicalCoordinates, UnequalCapacitancesHandExample) {
    // C = diag(1,4), R12 = R_ext = 1 → G = [[1,−1],[−1,2]],
    // −C^{-1/2}·G·C^{-1/2} = [[−1, 1/2], [1/2, −1/2]].
    const auto net = two_node(1.0, 4.0, 1.0, 1.0);
    const auto [canon, p] = canonical_coordinates(assemble_continuous(net), net);
    EXPECT_TRUE(canon.a.is_symmetric());
    EXPECT_DOUBLE_EQ(canon.a(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(canon.a(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(canon.a(1, 1), -0.5);
    // P = (C/C̄)^{1/2} with C̄ = 2.5
    EXPECT_DOUBLE_EQ(p(0, 0), std::sqrt(1.0 / 2.5));
    EXPECT_DOUBLE_EQ(p(1, 1), std::sqrt(4.0 / 2.5));
    EXPECT_DOUBLE_EQ(canon.b(1, 0), p(1, 1) * 0.25);
}

TEST(CanonicalCoordinates, EqualCapacitancesLeaveSystemUnchanged) {
    const auto net = build_network(MaterialSpec::target(), 3);
    const auto sys = assemble_continuous(net);
    const auto [canon, p] = canonical_coordinates(sys, net);
    EXPECT_LT((p - Matrix::identity(3)).max_abs(), 1e-15);
    EXPECT_LT(relative_difference(canon.a, sys.a), 1e-15);
    EXPECT_LT(relative_difference(canon.b, sys.b), 1e-15);
}

TEST(CanonicalCoordinates, SimilarityPreservesEigenstructure) {
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 5;
        ThermalNetwork net;
        for (std::size_t i = 0; i < n; ++i) net.capacitances.push_back(u(rng));
        for (std::size_t i = 0; i + 1 < n; ++i) net.internode_resistances.push_back(u(rng));
        net.ambient_resistance = u(rng);
        net.forced_node = n - 1;
        const auto sys = assemble_continuous(net);
        const auto [canon, p] = canonical_coordinates(sys, net);

        EXPECT_LT(relative_difference(similarity(sys.a, p), canon.a), 1e-12);
        const auto eig = eig_sym(SymmetricMatrix(canon.a));
        for (std::size_t k = 0; k < n; ++k) {
            // w is an eigenvector of Ã ⇔ P⁻¹w is an eigenvector of A with the same eigenvalue
            const std::vector<double> v = solve(p, Matrix::column(eig.vectors.col(k))).col(0);
            const auto av = sys.a * v;
            double res = 0.0;
            for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(av[i] - eig.values[k] * v[i]));
            EXPECT_LT(res, 1e-10 * std::max(1.0, sys.a.max_abs()) * norm2(v));
        }
        if (n == 2) {
            EXPECT_LT(spdsysid::testing::max_abs_diff(spdsysid::testing::eig2_charpoly(sys.a), eig.values), 1e-10);
        }
    }
}

TEST(Discretize, IntegratorLimit) {
    const auto d = discretize({Matrix(2, 2), Matrix::column({0.0, 1.0})}, 3600.0);
    EXPECT_EQ(d.phi_a, Matrix::identity(2));
    EXPECT_NEAR(d.phi_b(0, 0), 0.0, 1e-12);
    EXPECT_NEAR(d.phi_b(1, 0), 3600.0, 1e-12);
}

TEST(Discretize, SymmetricEigenvalues) {
    const auto d = discretize({Matrix{{-2.0, 1.0}, {1.0, -2.0}}, Matrix::column({0.0, 1.0})}, 0.1);
    const auto eig = eig_sym(SymmetricMatrix(d.phi_a));
    EXPECT_NEAR(eig.values[0], 0.904837418035960, 1e-14);
    EXPECT_NEAR(eig.values[1], 0.740818220681718, 1e-14);
    EXPECT_TRUE(d.phi_a.is_symmetric());
}

TEST(Discretize, ScalarClosedForm) {
    for (double a : {1e-6, 1e-3, 0.5, 3.0}) {
        for (double dt : {0.1, 1.0, 3600.0}) {
            const auto d = discretize({Matrix{{-a}}, Matrix{{2.0}}}, dt);
            const double expected = -std::expm1(-a * dt) * 2.0 / a;
            EXPECT_NEAR(d.phi_a(0, 0), std::exp(-a * dt), 1e-15);
            EXPECT_NEAR(d.phi_b(0, 0), expected, 1e-12 * std::max(1.0, expected)) << "a=" << a << " dt=" << dt;
        }
    }
}

TEST(Discretize, InvertibleFormAgreement) {
    // Φ_B = A⁻¹(e^{A·dt} − I)B with the exponential from a power series and A⁻¹ applied by LU.
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 4;
        const Matrix a = spdsysid::testing::random_matrix(n, n, rng) - Matrix::identity(n) * (2.0 * static_cast<double>(n));
        const Matrix b = spdsysid::testing::random_matrix(n, 1, rng);
        const double dt = 0.5;
        const auto d = discretize({a, b}, dt);
        const Matrix e = spdsysid::testing::taylor_expm(a * dt);
        const Matrix expected = solve(a, (e - Matrix::identity(n)) * b);
        EXPECT_LT(relative_difference(d.phi_b, expected), 1e-9);
        EXPECT_LT(relative_difference(d.phi_a, e), 1e-12);
    }
}

TEST(Discretize, RejectsNonPositiveStep) {
    EXPECT_THROW(discretize({Matrix{{-1.0}}, Matrix{{1.0}}}, 0.0), InvalidArgument);
    EXPECT_THROW(discretize({Matrix{{-1.0}}, Matrix{{1.0}}}, -1.0), InvalidArgument);
}

TEST(Discretize, NetworkModelsAreSpdContractions) {
    Rng rng(5);
    for (int trial = 0; trial < 60; ++trial) {
        const auto net = build_network(random_spec(rng), 2 + trial % 4);
        const auto [canon, p] = canonical_coordinates(assemble_continuous(net), net);
        const auto d = discretize_network(net, 3600.0);
        const auto eig = eig_sym(SymmetricMatrix(d.phi_a));
        EXPECT_GT(eig.values.back(), 0.0);
        EXPECT_LT(eig.values.front(), 1.0);
        EXPECT_TRUE(SpdMatrix::try_make(d.phi_a).has_value());
        const auto lam = eig_sym(SymmetricMatrix(canon.a)).values;
        for (std::size_t k = 0; k < lam.size(); ++k) {
            const double expected = std::exp(3600.0 * lam[k]);
            EXPECT_NEAR(eig.values[k], expected, 1e-10 * tolerance_scale(d.phi_a));
        }
        EXPECT_EQ(d.frame.transform, p);
    }
}

TEST(Simulate, IdentityDynamicsHoldState) {
    const DiscreteLti sys{Matrix::identity(2), Matrix(2, 1), 3600.0, CoordinateFrame::identity(2)};
    const auto traj = simulate(sys, {280.0, 290.0}, constant_forcing(10, 300.0));
    ASSERT_EQ(traj.states.rows(), 11u);
    for (std::size_t t = 0; t <= 10; ++t) {
        EXPECT_EQ(traj.states(t, 0), 280.0);
        EXPECT_EQ(traj.states(t, 1), 290.0);
    }
}

TEST(Simulate, ConvergesToFixedPoint) {
    const auto sys = discretize_network(build_network(MaterialSpec::target(), 2), 3600.0);
    const double u = 290.0;
    const auto traj = simulate(sys, {270.0, 275.0}, constant_forcing(400, u));
    // Working-frame fixed point z* = (I − Φ_A)⁻¹Φ_B·u, mapped back through the frame.
    const Matrix z_star = solve(Matrix::identity(2) - sys.phi_a, sys.phi_b * u);
    const auto t_star = sys.frame.to_physical(z_star.col(0));
    EXPECT_NEAR(traj.states(400, 0), t_star[0], 1e-8);
    EXPECT_NEAR(traj.states(400, 1), t_star[1], 1e-8);
    // the only heat source is the ambient, so the steady state is uniform at u
    EXPECT_NEAR(t_star[0], u, 1e-9);
    EXPECT_NEAR(t_star[1], u, 1e-9);
}

TEST(Simulate, GeometricConvergenceRate) {
    const auto net = build_network(MaterialSpec::misspecified(), 3);
    const auto sys = discretize_network(net, 3600.0, 285.0);
    const double rho = eig_sym(SymmetricMatrix(sys.phi_a)).values.front();
    const auto traj = simulate(sys, {260.0, 300.0, 270.0}, constant_forcing(200, 285.0));
    double prev = norm2(sys.frame.to_working(traj.state(0)));
    for (std::size_t t = 1; t <= 200; ++t) {
        const double cur = norm2(sys.frame.to_working(traj.state(t)));
        EXPECT_LE(cur, rho * prev * (1.0 + 1e-9) + 1e-12);
        prev = cur;
    }
}

TEST(Simulate, FreeDecayAlongEigenvectors) {
    const auto sys = discretize_network(build_network(MaterialSpec::target(), 2), 3600.0);
    const auto eig = eig_sym(SymmetricMatrix(sys.phi_a));
    const auto traj = simulate(sys, {5.0, -3.0}, constant_forcing(30, 0.0));
    std::vector<double> prev = (eig.vectors.transpose() * Matrix::column(traj.state(0))).col(0);
    for (std::size_t t = 1; t <= 30; ++t) {
        const std::vector<double> cur = (eig.vectors.transpose() * Matrix::column(traj.state(t))).col(0);
        for (std::size_t k = 0; k < 2; ++k) {
            EXPECT_NEAR(cur[k], eig.values[k] * prev[k], 1e-12 * std::max(1.0, std::abs(prev[k])));
            EXPECT_LE(std::abs(cur[k]), std::abs(prev[k]));
        }
        prev = cur;
    }
}

TEST(Simulate, FrameMatchesManualWorkingRollout) {
    const ThermalNetwork net = two_node(1e6, 3e6, 0.02, 0.005);
    const auto sys = discretize_network(net, 3600.0, 283.0);
    ForcingSeries f{100, {280.0, 281.0, 285.0, 290.0, 286.0}};
    const auto traj = simulate(sys, {279.0, 282.0}, f);
    EXPECT_EQ(traj.forcing.start_hour, 100);

    const Matrix& p = sys.frame.transform;
    std::vector<double> z{p(0, 0) * (279.0 - 283.0), p(1, 1) * (282.0 - 283.0)};
    for (std::size_t t = 0; t < f.size(); ++t) {
        const double w = f.values[t] - 283.0;
        const std::vector<double> next{sys.phi_a(0, 0) * z[0] + sys.phi_a(0, 1) * z[1] + sys.phi_b(0, 0) * w,
                                       sys.phi_a(1, 0) * z[0] + sys.phi_a(1, 1) * z[1] + sys.phi_b(1, 0) * w};
        z = next;
        EXPECT_NEAR(traj.states(t + 1, 0), z[0] / p(0, 0) + 283.0, 1e-10);
        EXPECT_NEAR(traj.states(t + 1, 1), z[1] / p(1, 1) + 283.0, 1e-10);
    }
}

TEST(Simulate, DimensionMismatch) {
    const auto sys = discretize_network(build_network(MaterialSpec::target(), 2), 3600.0);
    EXPECT_THROW(simulate(sys, {1.0, 2.0, 3.0}, constant_forcing(3, 0.0)), DimensionMismatch);
}

TEST(PhasePortrait, NegativeIdentityPointsAtOrigin) {
    const auto pp = phase_portrait({Matrix{{-1.0, 0.0}, {0.0, -1.0}}, Matrix(2, 1)}, {-2.0, 2.0, -1.0, 1.0, 5});
    ASSERT_EQ(pp.field.size(), 25u);
    for (const auto& s : pp.field) {
        EXPECT_EQ(s.dx, -s.x);
        EXPECT_EQ(s.dy, -s.y);
    }
}

TEST(PhasePortrait, EigenDirectionsOfCouplingMatrix) {
    const auto pp = phase_portrait({Matrix{{-2.0, 1.0}, {1.0, -2.0}}, Matrix(2, 1)}, {});
    ASSERT_EQ(pp.rays.size(), 2u);
    EXPECT_NEAR(pp.rays[0].eigenvalue, -1.0, 1e-14);
    EXPECT_NEAR(pp.rays[0].vx, pp.rays[0].vy, 1e-14);
    EXPECT_NEAR(pp.rays[1].eigenvalue, -3.0, 1e-14);
    EXPECT_NEAR(pp.rays[1].vx, -pp.rays[1].vy, 1e-14);
    for (const auto& s : pp.field) {
        if (s.x == s.y) {
            EXPECT_NEAR(s.dx, -s.x, 1e-15);
        }
        if (s.x == -s.y) {
            EXPECT_NEAR(s.dx, -3.0 * s.x, 1e-15);
        }
    }
}

TEST(PhasePortrait, NonSymmetricRealEigenpairs) {
    const Matrix a{{-1.0, 2.0}, {0.0, -3.0}};
    const auto pp = phase_portrait({a, Matrix(2, 1)}, {});
    ASSERT_EQ(pp.rays.size(), 2u);
    for (const auto& r : pp.rays) {
        EXPECT_NEAR(a(0, 0) * r.vx + a(0, 1) * r.vy, r.eigenvalue * r.vx, 1e-14);
        EXPECT_NEAR(a(1, 0) * r.vx + a(1, 1) * r.vy, r.eigenvalue * r.vy, 1e-14);
    }
    EXPECT_TRUE(phase_portrait({Matrix{{0.0, -1.0}, {1.0, 0.0}}, Matrix(2, 1)}, {}).rays.empty());
}

TEST(PhasePortrait, ZeroMatrixAndGridShape) {
    const auto pp = phase_portrait({Matrix(2, 2), Matrix(2, 1)}, {0.0, 1.0, 0.0, 1.0, 1});
    ASSERT_EQ(pp.field.size(), 1u);
    EXPECT_EQ(pp.field[0].x, 0.5);
    EXPECT_EQ(pp.field[0].dx, 0.0);
    EXPECT_EQ(pp.field[0].dy, 0.0);
}

TEST(PhasePortrait, Errors) {
    EXPECT_THROW(phase_portrait({Matrix::identity(3), Matrix(3, 1)}, {}), UnsupportedDimension);
    EXPECT_THROW(phase_portrait({Matrix::identity(2), Matrix(2, 1)}, {1.0, 0.0, 0.0, 1.0, 3}), InvalidArgument);
    EXPECT_THROW(phase_portrait({Matrix::identity(2), Matrix(2, 1)}, {0.0, 1.0, 0.0, 1.0, 0}), InvalidArgument);
}

TEST(ParameterSweep, EdgeCases) {
    const auto single = parameter_sweep(MaterialSpec::target(), SweepParameter::conductivity, {0.72});
    EXPECT_EQ(single.systems.size(), 1u);
    EXPECT_TRUE(single.distances.empty());
    const auto dup = parameter_sweep(MaterialSpec::target(), SweepParameter::outdoor_convection, {25.0, 25.0});
    ASSERT_EQ(dup.distances.size(), 1u);
    EXPECT_NEAR(dup.distances[0], 0.0, 1e-12);
    EXPECT_THROW(parameter_sweep(MaterialSpec::target(), SweepParameter::layer_thickness, {0.2, -0.1}), InvalidSpec);
}

TEST(ParameterSweep, ThicknessPathStaysOnManifold) {
    std::vector<double> values;
    for (int k = 0; k < 12; ++k) values.push_back(0.1 + 0.05 * k);
    const auto sweep = parameter_sweep(MaterialSpec::target(), SweepParameter::layer_thickness, values);
    ASSERT_EQ(sweep.distances.size(), values.size() - 1);
    for (const auto& sys : sweep.systems) EXPECT_TRUE(SpdMatrix::try_make(sys.phi_a).has_value());
    for (double d : sweep.distances) EXPECT_GT(d, 0.0);
    // the triangle inequality bounds the end-to-end distance by the path length
    double path = 0.0;
    for (double d : sweep.distances) path += d;
    EXPECT_LE(manifold::distance(SpdMatrix(sweep.systems.front().phi_a), SpdMatrix(sweep.systems.back().phi_a)),
              path * (1.0 + 1e-12));
}

TEST(ParameterSweep, ParseNames) {
    EXPECT_EQ(parse_sweep_parameter("layer_thickness"), SweepParameter::layer_thickness);
    EXPECT_EQ(parse_sweep_parameter("conductivity"), SweepParameter::conductivity);
    EXPECT_EQ(parse_sweep_parameter("outdoor_convection"), SweepParameter::outdoor_convection);
    EXPECT_THROW(parse_sweep_parameter("density"), InvalidSpec);
}
