#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gexpect/mc.hpp"

using namespace gexpect;

namespace {

const VolatilityBand kBand(1.0, 4.0);

ControlSearchConfig small_search(std::uint64_t seed = 7) {
    ControlSearchConfig c;
    c.n_candidates = 5;
    c.n_refine = 6;
    c.paths_per_candidate = 4000;
    c.final_paths = 40000;
    c.n_steps = 16;
    c.seed = seed;
    return c;
}

}  // namespace

TEST(ControlPath, RejectsInvalidPaths) {
    EXPECT_THROW(ControlPath::constant(1, 0.5, 1.0, kBand), std::invalid_argument);
    EXPECT_THROW(ControlPath::constant(1, 4.5, 1.0, kBand), std::invalid_argument);
    EXPECT_THROW(ControlPath({0.0, 0.5, 0.5}, {SymMatrix::identity(1), SymMatrix::identity(1)}, kBand), std::invalid_argument);
    EXPECT_THROW(ControlPath({0.1, 1.0}, {SymMatrix::identity(1)}, kBand), std::invalid_argument);
    EXPECT_THROW(ControlPath({0.0, 0.5, 1.0}, {SymMatrix::identity(1), SymMatrix::identity(2)}, kBand), std::invalid_argument);
    // off-diagonal mass pushes an eigenvalue out of [1, 4]
    EXPECT_THROW(ControlPath::constant(SymMatrix::from_rows({{2.0, 1.8}, {1.8, 2.0}}), 1.0, kBand), std::invalid_argument);
    EXPECT_NO_THROW(ControlPath::constant(SymMatrix::from_rows({{2.0, 0.5}, {0.5, 2.0}}), 1.0, kBand));
}

TEST(ControlPath, QuadraticVariationAndPieces) {
    const auto c = ControlPath::piecewise(1, {1.0, 4.0, 2.0, 3.0}, 2.0, kBand);
    EXPECT_NEAR(c.quadratic_variation(1.0)(0, 0), 0.5 * 1.0 + 0.5 * 4.0, 1e-14);
    EXPECT_NEAR(c.quadratic_variation(2.0)(0, 0), 0.5 * (1.0 + 4.0 + 2.0 + 3.0), 1e-14);
    EXPECT_EQ(c.at(0.75)(0, 0), 4.0);
    EXPECT_TRUE(c.aligned(8));
    EXPECT_FALSE(c.aligned(6));
}

TEST(Simulation, MisalignedControlIsRefused) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto c = ControlPath::piecewise(1, {1.0, 4.0, 2.0}, 1.0, kBand);
    EXPECT_THROW(simulate_under_control(sde, c, Vec{}, 32, 10, 1), std::invalid_argument);
    EXPECT_NO_THROW(simulate_under_control(sde, c, Vec{}, 33, 10, 1));
}

TEST(Simulation, DimensionMismatchIsRefused) {
    const SdeSpec sde = SdeSpec::brownian(2);
    EXPECT_THROW(simulate_under_control(sde, ControlPath::constant(1, 2.0, 1.0, kBand), Vec{}, 8, 4, 1), std::invalid_argument);
}

TEST(Simulation, QuadraticVariationIsExact) {
    const SdeSpec sde = SdeSpec::brownian(2);
    const SymMatrix g = SymMatrix::from_rows({{2.0, 0.5}, {0.5, 3.0}});
    const auto c = ControlPath::constant(g, 1.5, kBand);
    const auto b = simulate_under_control(sde, c, Vec{}, 24, 3, 5);
    for (int p = 0; p < 3; ++p)
        for (int s = 0; s <= 24; ++s)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) EXPECT_NEAR(b.qv(p, s, j, k), g(j, k) * b.time(s), 1e-12);
}

TEST(Simulation, StateTracksNoiseForBrownianMotion) {
    // sigma = I, b = h = 0: X_t = x0 + B_t
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto b = simulate_under_control(sde, ControlPath::constant(1, 3.0, 1.0, kBand), Vec{0.25}, 16, 50, 9);
    for (int p = 0; p < 50; ++p)
        for (int s = 0; s <= 16; ++s) EXPECT_NEAR(b.x(p, s, 0), 0.25 + b.b(p, s, 0), 1e-12);
}

TEST(Simulation, TerminalVarianceMatchesControl) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const double gamma = 3.0, T = 2.0;
    const int paths = 20000;
    const auto b = simulate_under_control(sde, ControlPath::constant(1, gamma, T, kBand), Vec{}, 8, paths, 3);
    RunningStats st;
    for (int p = 0; p < paths; ++p) st.add(b.b(p, 8, 0));
    EXPECT_NEAR(st.mean, 0.0, 4.0 * std::sqrt(gamma * T / paths));
    // sd of the sample variance is about sqrt(2 / N) relative
    EXPECT_NEAR(st.variance() / (gamma * T), 1.0, 4.0 * std::sqrt(2.0 / paths));
}

TEST(Simulation, BitIdenticalForSameSeed) {
    const SdeSpec sde = SdeSpec::brownian(2);
    const auto c = ControlPath::constant(2, 2.0, 1.0, kBand);
    const auto a = simulate_under_control(sde, c, Vec{}, 10, 20, 42);
    const auto b = simulate_under_control(sde, c, Vec{}, 10, 20, 42);
    const auto other = simulate_under_control(sde, c, Vec{}, 10, 20, 43);
    EXPECT_EQ(a.X, b.X);
    EXPECT_EQ(a.B, b.B);
    EXPECT_NE(a.X, other.X);
}

TEST(RunningStats, MergeMatchesSequential) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(1.0, 2.0);
    RunningStats all, left, right;
    for (int i = 0; i < 1000; ++i) {
        const double v = z(rng);
        all.add(v);
        (i < 377 ? left : right).add(v);
    }
    left.merge(right);
    EXPECT_EQ(left.count, all.count);
    EXPECT_NEAR(left.mean, all.mean, 1e-12);
    EXPECT_NEAR(left.variance(), all.variance(), 1e-10);
}

TEST(Estimate, ConstantFunctionalHasNoVariance) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto f = PathFunctional::of_terminal([](const Vec&) { return 2.5; }, "const");
    const auto e = estimate_under_control(sde, ControlPath::constant(1, 2.0, 1.0, kBand), f, Vec{}, 8, 5000, 1);
    EXPECT_EQ(e.mean, 2.5);
    EXPECT_EQ(e.std_error, 0.0);
    EXPECT_EQ(e.n_paths, 5000);
}

TEST(Estimate, IndependentOfWorkerCount) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto f = PathFunctional::of_terminal([](const Vec& x) { return std::cos(x[0]); }, "cos");
    const auto c = ControlPath::constant(1, 2.0, 1.0, kBand);
    WorkerPool one(1), three(3);
    const auto a = estimate_under_control(sde, c, f, Vec{}, 8, 3 * kChunkPaths + 17, 5, stream_tag::bundle, &one);
    const auto b = estimate_under_control(sde, c, f, Vec{}, 8, 3 * kChunkPaths + 17, 5, stream_tag::bundle, &three);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    // E cos(B_2) = exp(-1) under gamma = 2, t = 1
    EXPECT_NEAR(a.mean, std::exp(-1.0), 4.0 * a.std_error);
}

TEST(LowerBound, SureAndNullEvents) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto sure = capacity_lower_bound(EventSet::everything(1), sde, kBand, Vec{}, 1.0, small_search());
    EXPECT_EQ(sure.mean, 1.0);
    const auto point = capacity_lower_bound(EventSet::ball(1, Vec{0.3}, 0.0), sde, kBand, Vec{}, 1.0, small_search());
    EXPECT_EQ(point.mean, 0.0);
}

TEST(LowerBound, BallCapacityNearClassicalValue) {
    // the smallest volatility concentrates mass best: c(|X_1| <= 0.1) = P(|N(0,1)| <= 0.1)
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto e = capacity_lower_bound(EventSet::ball(1, Vec{}, 0.1), sde, kBand, Vec{}, 1.0, small_search());
    const double classical = std::erf(0.1 / std::sqrt(2.0));
    EXPECT_GE(e.mean, 0.06);
    EXPECT_LE(e.mean, classical + 3.0 * e.std_error);
    EXPECT_NEAR(e.mean, classical, 4.0 * e.std_error);
}

TEST(LowerBound, ConvexPayoffFindsUpperVolatility) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto f = PathFunctional::of_terminal([](const Vec& x) { return x[0] * x[0]; }, "square");
    SearchTrace trace;
    const auto e = expectation_lower_bound(f, sde, kBand, Vec{}, 1.0, small_search(), &trace);
    EXPECT_GT(trace.evaluations, 5);
    EXPECT_NEAR(e.mean, 4.0, 4.0 * e.std_error + 0.05);
    EXPECT_EQ(std::get<ControlPath>(e.control).values().front()(0, 0), 4.0);
}

TEST(LowerBound, PiecewiseAndFeedbackFamilies) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto f = PathFunctional::of_terminal([](const Vec& x) { return x[0] * x[0]; }, "square");
    auto cfg = small_search();
    cfg.family = ControlSearchConfig::Family::piecewise_constant;
    cfg.n_steps = 16;
    const auto pw = expectation_lower_bound(f, sde, kBand, Vec{}, 1.0, cfg);
    EXPECT_NEAR(pw.mean, 4.0, 4.0 * pw.std_error + 0.05);

    cfg.family = ControlSearchConfig::Family::feedback_threshold;
    EXPECT_THROW(expectation_lower_bound(f, sde, kBand, Vec{}, 1.0, cfg), std::invalid_argument);
    cfg.feedback_indicator = [](double, const Vec&) { return 1.0; };
    const auto fb = expectation_lower_bound(f, sde, kBand, Vec{}, 1.0, cfg);
    // an always-on indicator ties with the constant sigma_high_sq candidate
    EXPECT_NEAR(fb.mean, 4.0, 4.0 * fb.std_error + 0.05);
}

TEST(LowerBound, DegenerateBandSkipsSearch) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto f = PathFunctional::of_terminal([](const Vec& x) { return x[0] * x[0]; }, "square");
    SearchTrace trace{99, 0.0};
    const auto e = expectation_lower_bound(f, sde, VolatilityBand(2.0, 2.0), Vec{}, 1.0, small_search(), &trace);
    EXPECT_EQ(trace.evaluations, 0);
    EXPECT_NEAR(e.mean, 2.0, 4.0 * e.std_error);
}

TEST(LowerBound, RejectsBadSearchConfig) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto f = PathFunctional::of_terminal([](const Vec&) { return 1.0; }, "one");
    auto cfg = small_search();
    cfg.final_paths = 1;
    EXPECT_THROW(expectation_lower_bound(f, sde, kBand, Vec{}, 1.0, cfg), std::invalid_argument);
    cfg = small_search();
    cfg.n_steps = 0;
    EXPECT_THROW(expectation_lower_bound(f, sde, kBand, Vec{}, 1.0, cfg), std::invalid_argument);
}

TEST(LowerBound, SearchIsReproducible) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto f = PathFunctional::of_terminal([](const Vec& x) { return std::exp(-x[0] * x[0]); }, "bump");
    const auto a = expectation_lower_bound(f, sde, kBand, Vec{}, 1.0, small_search(11));
    const auto b = expectation_lower_bound(f, sde, kBand, Vec{}, 1.0, small_search(11));
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(describe(a.control), describe(b.control));
}

TEST(StrictInclusion, SupReachesHorizon) {
    for (int k : {2, 10, 100}) {
        const auto r = strict_inclusion_demo(k, 1.0, kBand);
        EXPECT_TRUE(r.demonstrates()) << k;
        EXPECT_NEAR(r.along_k, 1.0, 1e-9) << k;
        EXPECT_EQ(r.gamma_star, 2.5);
        EXPECT_NEAR(r.gamma_k, 2.5 - 1.0 / k, 1e-15);
    }
}

TEST(StrictInclusion, RefusesBadArguments) {
    EXPECT_THROW(strict_inclusion_demo(10, 1.0, VolatilityBand(1.0, 1.0)), std::invalid_argument);
    EXPECT_THROW(strict_inclusion_demo(2, 1.0, VolatilityBand(1.0, 1.5)), std::invalid_argument);
    EXPECT_THROW(strict_inclusion_demo(0, 1.0, kBand), std::invalid_argument);
    EXPECT_THROW(strict_inclusion_demo(10, 0.0, kBand), std::invalid_argument);
}
