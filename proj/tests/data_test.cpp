#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spdsysid/data/csv.hpp"
#include "spdsysid/data/forcing.hpp"
#include "spdsysid/data/generator.hpp"
#include "spdsysid/model/state_space.hpp"

using namespace spdsysid;
using namespace spdsysid::data;

namespace {

ForcingSeries parse_forcing(const std::string& text) {
    std::istringstream in(text);
    return read_forcing_csv(in);
}

template <class E>
std::size_t error_line(const std::string& text) {
    try {
        parse_forcing(text);
    } catch (const E& e) {
        return e.line();
    }
    ADD_FAILURE() << "no error raised";
    return 0;
}

Trajectory ramp_trajectory(std::size_t n) {
    Matrix s(n + 1, 2);
    ForcingSeries f{10, {}};
    for (std::size_t t = 0; t <= n; ++t) {
        s(t, 0) = 280.0 + 0.5 * static_cast<double>(t);
        s(t, 1) = 290.0 - 0.25 * static_cast<double>(t);
        if (t < n) f.values.push_back(285.0 + static_cast<double>(t % 3));
    }
    return {std::move(s), std::move(f)};
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("spdsysid_data_test_" + name);
}

std::pair<double, double> range(const ForcingSeries& f) {
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    return {*lo, *hi};
}

}  // namespace

TEST(SynthForcing, FlatProfileIsConstant) {
    const auto f = synth_forcing({290.0, 0.0, 0.0, 0.0, 7, 100});
    ASSERT_EQ(f.size(), 100u);
    for (double v : f.values) EXPECT_EQ(v, 290.0);
}

TEST(SynthForcing, DefaultLengthIsOneYearOfHours) {
    EXPECT_EQ(synth_forcing(ForcingProfile::london()).size(), 8759u);
}

TEST(SynthForcing, DeterministicPerSeed) {
    EXPECT_EQ(synth_forcing(ForcingProfile::london(3)).values, synth_forcing(ForcingProfile::london(3)).values);
    EXPECT_NE(synth_forcing(ForcingProfile::london(3)).values, synth_forcing(ForcingProfile::london(4)).values);
}

TEST(SynthForcing, ChicagoRangeIsWiderThanLondon) {
    for (std::uint64_t seed : {0, 1, 2}) {
        const auto [lo_l, hi_l] = range(synth_forcing(ForcingProfile::london(seed)));
        const auto [lo_c, hi_c] = range(synth_forcing(ForcingProfile::chicago(seed)));
        EXPECT_GT(hi_c - lo_c, hi_l - lo_l);
        EXPECT_LT(lo_c, lo_l);
        EXPECT_GT(hi_c, hi_l);
    }
}

TEST(SynthForcing, NoiselessShapeMatchesClosedForm) {
    const auto f = synth_forcing({284.0, 8.0, 4.0, 0.0, 0, 8760});
    EXPECT_NEAR(f.values[0], 284.0 - 8.0 - 4.0 * std::cos(2.0 * std::numbers::pi * -3.0 / 24.0), 1e-12);
    EXPECT_NEAR(f.values[3], 284.0 - 8.0 * std::cos(2.0 * std::numbers::pi * 3.0 / 8760.0) - 4.0, 1e-12);
    // hour 4395: seasonal peak side of the year, diurnal minimum ((4395 - 3)/24 = 183)
    EXPECT_NEAR(f.values[4395], 284.0 + 8.0 * std::cos(2.0 * std::numbers::pi * 15.0 / 8760.0) - 4.0, 1e-9);
}

TEST(SynthForcing, RejectsNegativeAmplitudes) {
    EXPECT_THROW(synth_forcing({284.0, -1.0, 0.0, 0.0}), InvalidArgument);
    EXPECT_THROW(synth_forcing({284.0, 0.0, 0.0, -0.1}), InvalidArgument);
}

TEST(ForcingCsv, ParsesValidFile) {
    const auto f = parse_forcing("hour,temperature_K\n5,280.5\n6,281\n7,279.25\n");
    EXPECT_EQ(f.start_hour, 5);
    EXPECT_EQ(f.values, (std::vector<double>{280.5, 281.0, 279.25}));
}

TEST(ForcingCsv, ToleratesCrlfAndBlankLines) {
    const auto f = parse_forcing("hour,temperature_K\r\n0,280\r\n\n1,281\r\n");
    EXPECT_EQ(f.values, (std::vector<double>{280.0, 281.0}));
}

TEST(ForcingCsv, MissingHourIsGap) {
    EXPECT_EQ(error_line<GapError>("hour,temperature_K\n0,280\n1,281\n3,282\n"), 4u);
    EXPECT_EQ(error_line<GapError>("hour,temperature_K\n0,280\n0,281\n"), 3u);
}

TEST(ForcingCsv, ParseErrorsCarryLineNumbers) {
    EXPECT_EQ(error_line<ParseError>("hour,temperature_K\n0,280\n1,warm\n"), 3u);
    EXPECT_EQ(error_line<ParseError>("hour,temp\n0,280\n"), 1u);
    EXPECT_EQ(error_line<ParseError>("hour,temperature_K\n0,280,1\n"), 2u);
    EXPECT_EQ(error_line<ParseError>("hour,temperature_K\n0.5,280\n"), 2u);
    EXPECT_EQ(error_line<ParseError>("hour,temperature_K\n0,nan\n"), 2u);
    EXPECT_EQ(error_line<ParseError>(""), 1u);
}

TEST(ForcingCsv, RoundTripIsExact) {
    const auto f = synth_forcing(ForcingProfile::chicago(9));
    std::ostringstream out;
    write_forcing_csv(out, f);
    const auto back = parse_forcing(out.str());
    EXPECT_EQ(back.values, f.values);
    EXPECT_EQ(back.start_hour, f.start_hour);
}

TEST(ForcingCsv, FileIo) {
    const auto path = temp_path("forcing.csv");
    save_forcing_csv(path.string(), ForcingSeries{2, {1.0, 2.0}});
    EXPECT_EQ(load_forcing_csv(path.string()).values, (std::vector<double>{1.0, 2.0}));
    std::filesystem::remove(path);
    EXPECT_THROW(load_forcing_csv(path.string()), IoError);
}

TEST(TrajectoryCsv, RoundTripIsExact) {
    const auto traj = ramp_trajectory(6);
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "hour,T_ext1,T_ext2,U");
    std::istringstream in(out.str());
    const auto back = read_trajectory_csv(in);
    EXPECT_EQ(back.states, traj.states);
    EXPECT_EQ(back.forcing.values, traj.forcing.values);
    EXPECT_EQ(back.forcing.start_hour, 10);
    EXPECT_EQ(back.labels, traj.labels);
}

TEST(Csv, MetadataLinesAreSkippedAndCounted) {
    const auto traj = ramp_trajectory(3);
    std::ostringstream out;
    write_trajectory_csv(out, traj, {{"seed", "12"}, {"source", "test"}});
    EXPECT_TRUE(out.str().starts_with("# seed=12\n# source=test\nhour,"));
    std::istringstream in(out.str());
    EXPECT_EQ(read_trajectory_csv(in).states, traj.states);
    EXPECT_EQ(error_line<ParseError>("# seed=1\nhour,temperature_K\n0,280\n1,warm\n"), 4u);
    EXPECT_EQ(error_line<ParseError>("# seed=1\n"), 2u);
}

TEST(TrajectoryCsv, MalformedInput) {
    const auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return read_trajectory_csv(in);
    };
    EXPECT_THROW(parse("hour,a,b\n"), ParseError);
    EXPECT_THROW(parse("hour,a,U\n0,1,2\n1,1,3\n"), ParseError);    // no terminating row
    EXPECT_THROW(parse("hour,a,U\n0,1,2\n2,1,\n"), GapError);
    EXPECT_THROW(parse("hour,a,U\n0,1,\n1,1,\n"), ParseError);     // rows after the end
    EXPECT_THROW(parse("hour,a,U\n0,1,2,3\n1,1,\n"), ParseError);
}

TEST(TrajectoryType, InvariantsEnforced) {
    EXPECT_THROW(Trajectory(Matrix(3, 2), ForcingSeries{0, {1.0}}), DimensionMismatch);
    EXPECT_THROW(Trajectory(Matrix(2, 2), ForcingSeries{0, {1.0}}, {"only_one"}), DimensionMismatch);
    Matrix bad(2, 1);
    bad(1, 0) = INFINITY;
    EXPECT_THROW(Trajectory(bad, ForcingSeries{0, {1.0}}), InvalidArgument);
}

TEST(Generator, TwoNodeNoiselessIsModelTrajectory) {
    const auto forcing = synth_forcing({284.0, 8.0, 4.0, 1.0, 5, 500});
    const auto traj = generate_target_data(model::MaterialSpec::target(), forcing, {2, 0.0, 0});
    const auto sys = model::discretize_network(model::build_network(model::MaterialSpec::target(), 2), 3600.0);
    const auto ref = model::simulate(sys, {forcing.values[0], forcing.values[0]}, forcing);
    EXPECT_EQ(traj.states, ref.states);
    EXPECT_EQ(traj.labels, (std::vector<std::string>{"T_ext1", "T_ext2"}));
}

TEST(Generator, FineDiscretizationDiffersBoundedly) {
    const auto forcing = synth_forcing({284.0, 8.0, 4.0, 1.0, 5, 2000});
    const auto coarse = generate_target_data(model::MaterialSpec::target(), forcing, {2, 0.0, 0});
    const auto fine = generate_target_data(model::MaterialSpec::target(), forcing, {10, 0.0, 0});
    const double diff = (coarse.states - fine.states).max_abs();
    EXPECT_GT(diff, 1e-3);
    const auto [lo, hi] = range(forcing);
    EXPECT_LT(diff, hi - lo);
}

TEST(Generator, ConstantForcingReachesEquilibrium) {
    ForcingSeries f{0, std::vector<double>(3000, 291.0)};
    f.values[0] = 270.0;  // start away from equilibrium
    const auto traj = generate_target_data(model::MaterialSpec::target(), f, {10, 0.0, 0});
    EXPECT_NEAR(traj.states(3000, 0), 291.0, 1e-6);
    EXPECT_NEAR(traj.states(3000, 1), 291.0, 1e-6);
}

TEST(Generator, DeterministicAndNoiseStatistics) {
    const auto forcing = synth_forcing({284.0, 8.0, 4.0, 1.0, 1, 4000});
    const auto clean = generate_target_data(model::MaterialSpec::target(), forcing, {10, 0.0, 0});
    const auto a = generate_target_data(model::MaterialSpec::target(), forcing, {10, 0.05, 42});
    const auto b = generate_target_data(model::MaterialSpec::target(), forcing, {10, 0.05, 42});
    EXPECT_EQ(a.states, b.states);
    double sum = 0.0, sq = 0.0;
    const auto d = (a.states - clean.states).data();
    for (double x : d) {
        sum += x;
        sq += x * x;
    }
    const double n = static_cast<double>(d.size());
    EXPECT_NEAR(sum / n, 0.0, 0.005);
    EXPECT_NEAR(std::sqrt(sq / n), 0.05, 0.005);
}

TEST(Generator, InvalidConfig) {
    const ForcingSeries f{0, {280.0, 281.0}};
    EXPECT_THROW(generate_target_data(model::MaterialSpec::target(), f, {1, 0.0, 0}), InvalidSpec);
    EXPECT_THROW(generate_target_data(model::MaterialSpec::target(), f, {2, -1.0, 0}), InvalidArgument);
    EXPECT_THROW(generate_target_data(model::MaterialSpec::target(), ForcingSeries{}, {2, 0.0, 0}), InvalidArgument);
}

TEST(Split, EvenHalves) {
    const auto traj = ramp_trajectory(10);
    const auto s = split(traj, 0.5);
    EXPECT_EQ(s.train.length(), 5u);
    EXPECT_EQ(s.test.length(), 5u);
    EXPECT_EQ(s.test.forcing.start_hour, 15);
    EXPECT_EQ(s.train.state(5), s.test.state(0));
}

TEST(Split, ReassemblyReproducesOriginal) {
    const auto traj = ramp_trajectory(17);
    const auto s = split(traj, 0.7);
    std::vector<double> forcing = s.train.forcing.values;
    forcing.insert(forcing.end(), s.test.forcing.values.begin(), s.test.forcing.values.end());
    EXPECT_EQ(forcing, traj.forcing.values);
    for (std::size_t t = 0; t <= traj.length(); ++t) {
        const auto row = t <= s.train.length() ? s.train.state(t) : s.test.state(t - s.train.length());
        EXPECT_EQ(row, traj.state(t));
    }
}

TEST(Split, TooShortAndBadFraction) {
    EXPECT_THROW(split(ramp_trajectory(10), 0.95), TooShort);
    EXPECT_THROW(split(ramp_trajectory(10), 0.05), TooShort);
    EXPECT_THROW(split(ramp_trajectory(3), 0.5), TooShort);
    EXPECT_THROW(split(ramp_trajectory(10), 0.0), InvalidArgument);
    EXPECT_THROW(split(ramp_trajectory(10), 1.0), InvalidArgument);
}
