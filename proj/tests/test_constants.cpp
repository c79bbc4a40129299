#include <gtest/gtest.h>

#include <cstring>

#include "gexpect/constants.hpp"
#include "gexpect/sde.hpp"

using namespace gexpect;

namespace {

CoefficientBounds unit_bounds() {
    CoefficientBounds b;
    b.n = b.d = 1;
    b.lambda = b.Lambda = 1.0;
    b.gamma_row = b.Gamma_row = 1.0;
    return b;
}

}  // namespace

TEST(FullCoefficientConstants, ClassicalSubstitution) {
    const auto k = lemma32_constants(unit_bounds(), VolatilityBand(1.0, 1.0), 2.0, 0.0);
    EXPECT_DOUBLE_EQ(k.alpha, 1.0 / 8.0);
    EXPECT_DOUBLE_EQ(k.beta, 1.0 / 2.0);
    EXPECT_DOUBLE_EQ(k.kappa, 0.0);
    EXPECT_DOUBLE_EQ(k.epsilon, 2.0);
    EXPECT_DOUBLE_EQ(k.m_min, 0.0);
}

TEST(FullCoefficientConstants, WithLipschitzAndDriftSup) {
    auto b = unit_bounds();
    b.C = 1.0;
    const auto k = lemma32_constants(b, VolatilityBand(1.0, 2.0), 1.0, 1.0);
    // growth = 2 * 1 * 1 + 1 = 3: kappa = 1 * 3 + 1 * 9 / 1
    EXPECT_DOUBLE_EQ(k.kappa, 12.0);
    EXPECT_DOUBLE_EQ(k.alpha, 1.0 / 16.0);
    EXPECT_DOUBLE_EQ(k.beta, 1.0 / 4.0);
    EXPECT_DOUBLE_EQ(k.epsilon, 1.0 / 96.0);
    EXPECT_DOUBLE_EQ(k.m_min, 96.0);
    // a shorter horizon caps the window
    EXPECT_DOUBLE_EQ(lemma32_constants(b, VolatilityBand(1.0, 2.0), 0.001, 1.0).epsilon, 0.001);
}

TEST(DriftlessConstants, Substitution) {
    const auto flat = driftless_constants(unit_bounds(), VolatilityBand(1.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(flat.alpha, 0.5);
    EXPECT_DOUBLE_EQ(flat.beta, 1.0);
    const auto wide = driftless_constants(unit_bounds(), VolatilityBand(1.0, 4.0), 1.0);
    EXPECT_DOUBLE_EQ(wide.alpha, 1.0 / 8.0);
    EXPECT_DOUBLE_EQ(wide.beta, 1.0 / 4.0);
    EXPECT_DOUBLE_EQ(wide.epsilon, 1.0);
}

TEST(CoordinateConstants, Substitution) {
    const auto k = lemma36_constants(unit_bounds(), VolatilityBand(1.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(k.alpha, 1.0 / 8.0);
    EXPECT_DOUBLE_EQ(k.beta, 1.0 / 2.0);
    EXPECT_DOUBLE_EQ(k.kappa, 0.0);
    auto b = unit_bounds();
    b.L = 1.0;
    const auto k2 = lemma36_constants(b, VolatilityBand(1.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(k2.kappa, 4.0);
    EXPECT_DOUBLE_EQ(k2.epsilon, 1.0 / 32.0);
}

TEST(Constants, PureArithmeticIsBitIdentical) {
    auto b = unit_bounds();
    b.C = 0.37;
    b.L = 0.11;
    const VolatilityBand band(0.7, 3.1);
    const auto a1 = lemma32_constants(b, band, 1.3, 0.2), a2 = lemma32_constants(b, band, 1.3, 0.2);
    EXPECT_EQ(std::memcmp(&a1, &a2, sizeof a1), 0);
    const auto c1 = lemma36_constants(b, band, 1.3), c2 = lemma36_constants(b, band, 1.3);
    EXPECT_EQ(std::memcmp(&c1, &c2, sizeof c1), 0);
}

TEST(Constants, RejectBadInputs) {
    auto b = unit_bounds();
    b.lambda = 2.0;  // lambda > Lambda
    EXPECT_THROW(driftless_constants(b, VolatilityBand(1.0, 4.0), 1.0), std::invalid_argument);
    EXPECT_THROW(driftless_constants(unit_bounds(), VolatilityBand(1.0, 4.0), 0.0), std::invalid_argument);
    EXPECT_THROW(lemma32_constants(unit_bounds(), VolatilityBand(1.0, 4.0), 1.0, -1.0), std::invalid_argument);
}

TEST(DecayBound, StrictlyDecreasingInM) {
    const auto k = driftless_constants(unit_bounds(), VolatilityBand(1.0, 4.0), 1.0);
    EXPECT_GT(k.decay_bound(8), k.decay_bound(32));
    EXPECT_GT(k.decay_bound(32), k.decay_bound(128));
    EXPECT_DOUBLE_EQ(k.decay_bound(8), std::pow(9.0, -0.125));
}

TEST(SupersolutionValue, Examples) {
    const auto k = driftless_constants(unit_bounds(), VolatilityBand(1.0, 4.0), 1.0);
    const Vec a{0.3};
    for (double t : {0.0, 0.4, 0.9}) EXPECT_DOUBLE_EQ(supersolution_value(t, a, 1, k, a, 8.0), std::pow(1.0 + 8.0 * (1.0 - t), -k.alpha));
    const Vec x{1.1};
    EXPECT_DOUBLE_EQ(supersolution_value(1.0, x, 1, k, a, 8.0), std::exp(-8.0 * k.beta * 0.64 / 2.0));
    EXPECT_DOUBLE_EQ(supersolution_value(0.2, x, 1, k, a, 0.0), 1.0);
    EXPECT_THROW(supersolution_value(1.5, x, 1, k, a, 8.0), std::invalid_argument);
}

TEST(SupersolutionValue, CoordinateVariantIgnoresOtherAxes) {
    const auto k = driftless_constants(unit_bounds(), VolatilityBand(1.0, 4.0), 1.0);
    const Vec a{}, x1{0.5, 0.0}, x2{0.5, 7.0};
    EXPECT_DOUBLE_EQ(supersolution_value(0.5, x1, 2, k, a, 4.0, 0), supersolution_value(0.5, x2, 2, k, a, 4.0, 0));
    EXPECT_THROW(supersolution_value(0.5, x1, 2, k, a, 4.0, 2), std::invalid_argument);
}

TEST(SdeSpec, CoefficientSupSamplesDrift) {
    const auto sde = SdeSpec::with_analytic_bounds(2, 2, DriftField::constant(Vec{3.0, 4.0}), CorrectionField::zero(),
                                                   DiffusionField::constant(SmallMat::identity(2)));
    EXPECT_DOUBLE_EQ(sde.coefficient_sup(Vec{}, 1.0), 5.0);
    EXPECT_DOUBLE_EQ(sde.bounds().L, 4.0);
}

TEST(SdeSpec, AnalyticBoundsOfCorrelatedSigma) {
    const auto sde = SdeSpec::with_analytic_bounds(2, 1, DriftField::zero(), CorrectionField::zero(),
                                                   DiffusionField::constant(SmallMat::from_rows({{1.0}, {0.5}})));
    // n > d: ellipticity from sigma^T sigma = 1.25, row norms 1 and 0.25
    EXPECT_DOUBLE_EQ(sde.bounds().lambda, 1.25);
    EXPECT_DOUBLE_EQ(sde.bounds().gamma_row, 0.25);
    EXPECT_DOUBLE_EQ(sde.bounds().Gamma_row, 1.0);
}

TEST(SdeSpec, RejectsShapeMismatchAndBadModulation) {
    EXPECT_THROW(SdeSpec::with_analytic_bounds(2, 2, DriftField::zero(), CorrectionField::zero(),
                                               DiffusionField::constant(SmallMat::identity(1))),
                 std::invalid_argument);
    EXPECT_THROW(SdeSpec::with_analytic_bounds(1, 1, DriftField::zero(), CorrectionField::zero(),
                                               DiffusionField::modulated(SmallMat::identity(1), 1.0)),
                 std::invalid_argument);
}

TEST(SdeSpec, RejectsAsymmetricCorrection) {
    std::vector<std::vector<std::vector<double>>> c(1, std::vector<std::vector<double>>(2, std::vector<double>(2, 0.0)));
    c[0][0][1] = 0.3;
    EXPECT_THROW(SdeSpec::with_analytic_bounds(1, 2, DriftField::zero(), CorrectionField::make(CorrectionField::Kind::constant, c),
                                               DiffusionField::constant(SmallMat::from_rows({{1.0, 0.0}}))),
                 std::invalid_argument);
}
