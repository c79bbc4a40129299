#include <gtest/gtest.h>

#include <cmath>

#include "gexpect/krylov.hpp"

using namespace gexpect;

namespace {

const VolatilityBand kBand(1.0, 4.0);

ControlSearchConfig quick(std::uint64_t seed = 3) {
    ControlSearchConfig c;
    c.n_candidates = 3;
    c.n_refine = 4;
    c.paths_per_candidate = 2000;
    c.final_paths = 8000;
    c.seed = seed;
    return c;
}

// E int_0^T 1{|B_t| <= eps} dt for a standard Brownian motion, by midpoint rule in t
double classical_ball_occupation(double eps, double T) {
    const int q = 20000;
    double acc = 0.0;
    for (int i = 0; i < q; ++i) {
        const double t = (i + 0.5) * T / q;
        acc += std::erf(eps / std::sqrt(2.0 * t));
    }
    return acc * T / q;
}

}  // namespace

TEST(ExitTime, LinearPathExamples) {
    std::vector<Vec> path;
    for (int i = 0; i <= 10; ++i) path.push_back(Vec{0.1 * i});
    const Box box = Box::cube(1, -0.5, 0.5);
    const auto k = exit_time(path, box);
    EXPECT_TRUE(k == 5 || k == 6) << k;
    EXPECT_EQ(exit_time(path, Box::cube(1, -2.0, 2.0)), 10u);
    EXPECT_EQ(exit_time(path, Box::cube(1, 0.05, 2.0)), 0u);
    EXPECT_THROW(exit_time({}, box), std::invalid_argument);
}

TEST(Occupation, ZeroIntegrandGivesZero) {
    OccupationQuery q;
    q.integrand = Integrand::of(ScalarField::zero());
    q.dt = 1.0 / 64.0;
    const auto r = occupation_functional(q, ItoProcessSpec::brownian(1), kBand, quick());
    EXPECT_EQ(r.estimate.mean, 0.0);
    EXPECT_EQ(r.estimate.std_error, 0.0);
}

TEST(Occupation, ConstantOverFiniteHorizon) {
    OccupationQuery q;
    q.integrand = Integrand::constant(2.0);
    q.T = 1.5;
    q.dt = 1.0 / 64.0;
    const auto r = occupation_functional(q, ItoProcessSpec::brownian(1), kBand, quick());
    EXPECT_NEAR(r.estimate.mean, 3.0, 1e-12);
}

TEST(Occupation, DiscountedConstant) {
    // int_0^H e^{-delta t} dt by the trapezoid rule; the tail past H is below 1e-8 / delta
    OccupationQuery q;
    q.integrand = Integrand::constant(1.0);
    q.mode = OccupationQuery::Mode::discounted;
    q.delta = 2.0;
    q.dt = 1.0 / 64.0;
    const auto r = occupation_functional(q, ItoProcessSpec::brownian(1), kBand, quick());
    const double H = r.horizon;
    EXPECT_GE(H, q.discount_horizon());
    EXPECT_NEAR(r.estimate.mean, (1.0 - std::exp(-q.delta * H)) / q.delta, q.dt * q.dt);
    EXPECT_NEAR(r.estimate.mean, 1.0 / q.delta, q.dt * q.dt + 1e-8);
}

TEST(Occupation, PositivelyHomogeneous) {
    OccupationQuery q;
    q.integrand = Integrand::indicator(EventSet::ball(1, Vec{}, 0.3));
    q.dt = 1.0 / 64.0;
    const auto proc = ItoProcessSpec::brownian(1);
    const auto a = occupation_functional(q, proc, kBand, quick());
    q.integrand = Integrand::indicator(EventSet::ball(1, Vec{}, 0.3), 3.0);
    const auto b = occupation_functional(q, proc, kBand, quick());
    EXPECT_NEAR(b.estimate.mean, 3.0 * a.estimate.mean, 1e-12);
}

TEST(Occupation, ExitTruncationNeverExceedsFiniteHorizon) {
    // degenerate band: a single measure, so the comparison is pathwise
    const VolatilityBand flat(2.0, 2.0);
    const auto proc = ItoProcessSpec::brownian(1);
    OccupationQuery q;
    q.integrand = Integrand::constant(1.0);
    q.T = 2.0;
    q.dt = 1.0 / 64.0;
    const auto full = occupation_functional(q, proc, flat, quick());
    q.mode = OccupationQuery::Mode::exit_truncated;
    q.region = Box::cube(1, -0.5, 0.5);
    const auto cut = occupation_functional(q, proc, flat, quick());
    EXPECT_FALSE(cut.outside_region);
    EXPECT_LT(cut.estimate.mean, full.estimate.mean);
    EXPECT_GT(cut.estimate.mean, 0.0);
}

TEST(Occupation, StartOutsideRegion) {
    OccupationQuery q;
    q.integrand = Integrand::constant(1.0);
    q.mode = OccupationQuery::Mode::exit_truncated;
    q.region = Box::cube(1, 1.0, 2.0);
    const auto r = occupation_functional(q, ItoProcessSpec::brownian(1), kBand, quick());
    EXPECT_TRUE(r.outside_region);
    EXPECT_EQ(r.estimate.mean, 0.0);
}

TEST(Occupation, RejectsBadQueries) {
    const auto proc = ItoProcessSpec::brownian(2);
    OccupationQuery q;
    q.p = 1.0;  // below n = 2
    EXPECT_THROW(occupation_functional(q, proc, kBand, quick()), std::invalid_argument);
    q.p = 2.0;
    q.mode = OccupationQuery::Mode::exit_truncated;
    q.region = Box::cube(2, -1.0, std::numeric_limits<double>::infinity());
    EXPECT_THROW(occupation_functional(q, proc, kBand, quick()), std::invalid_argument);
    q.mode = OccupationQuery::Mode::discounted;
    q.delta = 0.0;
    EXPECT_THROW(occupation_functional(q, proc, kBand, quick()), std::invalid_argument);
}

TEST(Battery, ClassicalOracleAndMonotoneInEps) {
    const auto proc = ItoProcessSpec::brownian(1);
    std::vector<Integrand> fam;
    const std::vector<double> eps{0.4, 0.2, 0.1};
    for (double e : eps) fam.push_back(Integrand::indicator(EventSet::ball(1, Vec{}, e)));
    const auto est = battery_occupation(fam, proc, kBand, 1.0, 1.0 / 256.0, 20000, 5);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        // sigma_low_sq = 1 keeps the path near 0 longest
        EXPECT_EQ(std::get<ControlPath>(est[i].control).values().front()(0, 0), 1.0);
        EXPECT_NEAR(est[i].mean, classical_ball_occupation(eps[i], 1.0), 4.0 * est[i].std_error + 0.01) << eps[i];
        if (i) EXPECT_LE(est[i].mean, est[i - 1].mean);
    }
}

TEST(Scaling, SlopeOfPowerLaw) {
    EXPECT_NEAR(loglog_slope({1.0, 2.0, 4.0}, {3.0, 12.0, 48.0}), 2.0, 1e-12);
    EXPECT_THROW(loglog_slope({1.0, 2.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST(Scaling, BallOccupationScalesWithRadius) {
    const auto proc = ItoProcessSpec::brownian(1);
    const auto r = krylov_scaling_check(Vec{}, 1.0, proc, kBand, {0.2, 0.1, 0.05}, 1.0, 1.0 / 256.0, 20000, 9);
    EXPECT_TRUE(r.pass) << r.slope;
    EXPECT_NEAR(r.required, 0.9, 1e-15);
}

TEST(Scaling, RejectsBadInputs) {
    const auto proc = ItoProcessSpec::brownian(1);
    EXPECT_THROW(krylov_scaling_check(Vec{}, 1.0, proc, kBand, {0.2, 0.1}, 1.0, 0.01, 100, 1), std::invalid_argument);
    EXPECT_THROW(krylov_scaling_check(Vec{}, 1.0, proc, kBand, {0.2, 0.1, 0.04}, 1.0, 0.01, 100, 1), std::invalid_argument);
    EXPECT_THROW(krylov_scaling_check(Vec{}, 0.5, proc, kBand, {0.2, 0.1, 0.05}, 1.0, 0.01, 100, 1), std::invalid_argument);
}

TEST(ItoProcess, RequiresNAtMostD) {
    const SdeSpec wide = SdeSpec::with_analytic_bounds(2, 1, DriftField::zero(), CorrectionField::zero(),
                                                       DiffusionField::constant(SmallMat::from_rows({{1.0}, {1.0}})));
    EXPECT_THROW(ItoProcessSpec(wide, Vec{}), std::invalid_argument);
}

TEST(DominatedConvergence, IdenticalFamilyHasZeroError) {
    const auto proc = ItoProcessSpec::brownian(1);
    const std::vector<ScalarField> fam{ScalarField::sign(), ScalarField::sign(), ScalarField::sign()};
    const auto r = dominated_convergence_check(fam, ScalarField::sign(), {1.0, 0.0}, proc, kBand, 1.0, 1.0, 1.0 / 64.0, 2000, 1);
    for (const auto& e : r.errors) EXPECT_EQ(e.mean, 0.0);
    EXPECT_TRUE(r.non_increasing);
}

TEST(DominatedConvergence, MollifiedSignConverges) {
    const auto proc = ItoProcessSpec::brownian(1);
    std::vector<ScalarField> fam;
    for (double k : {1.0, 4.0, 16.0, 64.0}) fam.push_back(ScalarField::clamp_linear(k));
    const auto r = dominated_convergence_check(fam, ScalarField::sign(), {1.0, 0.0}, proc, kBand, 1.0, 1.0, 1.0 / 128.0, 4000, 2);
    EXPECT_TRUE(r.pass) << r.drop;
    EXPECT_GT(r.drop, 10.0);
}

TEST(DominatedConvergence, EnvelopeIsEnforced) {
    const auto proc = ItoProcessSpec::brownian(1);
    const std::vector<ScalarField> fam{ScalarField::coordinate(0), ScalarField::sign()};
    EXPECT_THROW(dominated_convergence_check(fam, ScalarField::sign(), {1.0, 0.0}, proc, kBand, 1.0, 1.0, 0.1, 10, 1),
                 std::invalid_argument);
    EXPECT_THROW(dominated_convergence_check({ScalarField::sign(), ScalarField::sign()}, ScalarField::constant(3.0),
                                             {1.0, 0.0}, proc, kBand, 1.0, 1.0, 0.1, 10, 1),
                 std::invalid_argument);
    EXPECT_THROW(dominated_convergence_check({ScalarField::sign()}, ScalarField::sign(), {1.0, 0.0}, proc, kBand, 1.0, 1.0,
                                             0.1, 10, 1),
                 std::invalid_argument);
}
