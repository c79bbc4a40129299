#include <gtest/gtest.h>

#include <cmath>

#include "gexpect/pde_checks.hpp"

using namespace gexpect;

namespace {

const VolatilityBand kFlat(1.0, 1.0);
const VolatilityBand kBand(1.0, 4.0);

SdeSpec drifted_1d() {
    return SdeSpec::with_analytic_bounds(1, 1, DriftField::tanh_reversion(0.05), CorrectionField::zero(),
                                         DiffusionField::constant(SmallMat::identity(1)));
}

}  // namespace

TEST(Calibration, AllowanceCoversExactSolutions) {
    const auto rows = calibrate_residual_allowance();
    ASSERT_EQ(rows.size(), 6u);
    for (const auto& r : rows) {
        EXPECT_LE(r.ratio, kResidualAllowance) << "m=" << r.m << " dx=" << r.dx;
        EXPECT_GT(r.ratio, 0.0);
    }
}

TEST(Calibration, ExactSolutionHasSmallResidual) {
    // the discrete residual of the exact heat solution shrinks with the grid
    const auto rows = calibrate_residual_allowance({0.04, 0.02}, {4.0});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_LT(rows[1].residual, rows[0].residual);
}

TEST(BoundScan, DegenerateBandIsTight) {
    // sigma^2 = 1: the supersolution is the exact solution, so max u = bound
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto scan = theorem34_bound_scan(sde, kFlat, Vec{}, 1.0, {1.0, 4.0, 16.0}, 0.01);
    ASSERT_EQ(scan.rows.size(), 3u);
    for (const auto& r : scan.rows) {
        EXPECT_TRUE(r.pass);
        EXPECT_NEAR(r.value, r.bound, r.tol) << r.m;
        EXPECT_NEAR(r.bound, std::pow(1.0 + r.m, -0.5), 1e-12);
    }
}

TEST(BoundScan, HoldsUnderBand) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto scan = theorem34_bound_scan(sde, kBand, Vec{0.5}, 1.0, {1.0, 4.0, 16.0}, 0.02);
    EXPECT_TRUE(scan.pass());
    for (const auto& r : scan.rows) {
        EXPECT_LE(r.slack, r.tol);
        EXPECT_LE(r.value_at_a, r.value + 1e-15);
    }
    // decreasing in m
    EXPECT_GT(scan.rows[0].value, scan.rows[1].value);
    EXPECT_GT(scan.rows[1].value, scan.rows[2].value);
}

TEST(BoundScan, RefusesSmallM) {
    const SdeSpec sde = drifted_1d();
    const auto k = constants_for(sde, kBand, Vec{}, 1.0);
    ASSERT_GT(k.m_min, 0.0);
    EXPECT_THROW(theorem34_bound_scan(sde, kBand, Vec{}, 1.0, {0.5 * k.m_min}, 0.05), std::invalid_argument);
}

TEST(Supersolution, ResidualNonPositiveDriftless) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto k = constants_for(sde, kBand, Vec{}, 1.0);
    const auto p = TerminalPayoff::gaussian_bump(1, 4.0, k.beta, Vec{});
    const GridSpec g = GridSpec::fitted(sde, kBand, p, 1.0, 0.02);
    const auto r = supersolution_residual(k, sde, kBand, Vec{}, 4.0, g);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.max_residual, r.tol);
    EXPECT_EQ(r.tol, tol_fd(g));
}

TEST(Supersolution, ResidualNonPositiveWithDrift) {
    const SdeSpec sde = drifted_1d();
    const auto k = constants_for(sde, kBand, Vec{}, 1.0);
    const double m = std::max(4.0, k.m_min);
    const auto p = TerminalPayoff::gaussian_bump(1, m, k.beta, Vec{});
    const GridSpec g = GridSpec::fitted(sde, kBand, p, 1.0, 0.02);
    const auto r = supersolution_residual(k, sde, kBand, Vec{}, m, g);
    EXPECT_TRUE(r.pass) << r.max_residual << " vs " << r.tol;
    EXPECT_GT(r.steps, 0);
}

TEST(Supersolution, RefusesBadArguments) {
    const SdeSpec sde = drifted_1d();
    const auto k = constants_for(sde, kBand, Vec{}, 1.0);
    const auto p = TerminalPayoff::gaussian_bump(1, k.m_min, k.beta, Vec{});
    const GridSpec g = GridSpec::fitted(sde, kBand, p, 1.0, 0.05);
    EXPECT_THROW(supersolution_residual(k, sde, kBand, Vec{}, 0.5 * k.m_min, g), std::invalid_argument);
    const GridSpec other = GridSpec::fitted(sde, kBand, p, 0.5, 0.05);
    EXPECT_THROW(supersolution_residual(k, sde, kBand, Vec{}, k.m_min, other), std::invalid_argument);
}

TEST(Capacity, BallExampleBetweenClassicalAndBound) {
    // one dimension, sigma^2 = 1, eps = 0.1, t = 1: P(|B_1| <= 0.1) = 0.0797
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto k = driftless_constants(sde.bounds(), kFlat, 1.0);
    const double bound = ball_capacity_bound(k, 0.1, 1.0);
    EXPECT_NEAR(bound, std::exp(0.5) * 0.1, 1e-12);
    const auto est = capacity_upper_via_pde(EventSet::ball(1, Vec{}, 0.1), 0.05, sde, kFlat, 1.0, 0.005, Vec{});
    EXPECT_FALSE(est.empty);
    const double classical = std::erf(0.1 / std::sqrt(2.0));
    EXPECT_GE(est.value, classical - est.tol);
    EXPECT_LE(est.value, bound + est.tol);
}

TEST(Capacity, ShrinksWithRadiusUnderBand) {
    const SdeSpec sde = SdeSpec::brownian(1);
    double prev = 2.0;
    for (double eps : {0.4, 0.2, 0.1}) {
        const auto est = capacity_upper_via_pde(EventSet::ball(1, Vec{}, eps), eps / 2, sde, kBand, 1.0, 0.01, Vec{});
        const auto k = driftless_constants(sde.bounds(), kBand, 1.0);
        EXPECT_LE(est.value, ball_capacity_bound(k, eps, 1.0) + est.tol) << eps;
        EXPECT_LT(est.value, prev);
        prev = est.value;
    }
}

TEST(Decay, EnvelopeAtZeroRateIsOne) {
    const auto k = driftless_constants(SdeSpec::brownian(1).bounds(), kBand, 2.0);
    EXPECT_EQ(decay_envelope(k, 0.0, 3.0, 2.0), 1.0);
    EXPECT_LT(decay_envelope(k, 4.0, 1.0, 100.0), 1.0);
}

TEST(Decay, ScanDecreasesAndStaysUnderEnvelope) {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto scan = longtime_decay_scan(sde, kBand, 1.0, {1.0, 4.0, 16.0}, 1.0, 0.05);
    ASSERT_EQ(scan.rows.size(), 3u);
    EXPECT_TRUE(scan.decreasing);
    EXPECT_TRUE(scan.pass());
}

TEST(Decay, RefusesDrift) {
    EXPECT_THROW(longtime_decay_scan(drifted_1d(), kBand, 1.0, {1.0}, 1.0, 0.05), std::invalid_argument);
    EXPECT_THROW(longtime_decay_scan(SdeSpec::brownian(1), kBand, 0.0, {1.0}, 1.0, 0.05), std::invalid_argument);
}
