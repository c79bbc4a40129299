#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gexpect/constants.hpp"
#include "gexpect/linalg.hpp"

namespace gexpect {

/// Drift b(t, x) in R^n.
struct DriftField {
    enum class Kind { zero, constant, tanh_reversion };
    Kind kind = Kind::zero;
    Vec level{};       // constant: b_i = level_i
    double rate = 0.0; // tanh_reversion: b_i = -rate * tanh(x_i - center_i)
    Vec center{};

    static DriftField zero() { return {}; }
    static DriftField constant(const Vec& c) { return {Kind::constant, c, 0.0, {}}; }
    static DriftField tanh_reversion(double rate, const Vec& center = {}) {
        return {Kind::tanh_reversion, {}, rate, center};
    }

    double component(int i, double /*t*/, const Vec& x) const {
        const auto k = static_cast<std::size_t>(i);
        switch (kind) {
            case Kind::zero: return 0.0;
            case Kind::constant: return level[k];
            case Kind::tanh_reversion: return -rate * std::tanh(x[k] - center[k]);
        }
        return 0.0;
    }
};

/// Correction family h^{jk}(t, x) in R^n, symmetric in (j, k).
struct CorrectionField {
    enum class Kind { zero, constant, tanh_scaled };
    Kind kind = Kind::zero;
    // coefficient[i][j][k], flattened as (i * kMaxDim + j) * kMaxDim + k
    std::array<double, kMaxDim * kMaxDim * kMaxDim> coeff{};

    static CorrectionField zero() { return {}; }

    /// h_i^{jk} = c[i][j][k] (constant) or c[i][j][k] tanh(x_i) (tanh_scaled).
    static CorrectionField make(Kind kind, const std::vector<std::vector<std::vector<double>>>& c) {
        CorrectionField f;
        f.kind = kind;
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < c[i].size(); ++j)
                for (std::size_t k = 0; k < c[i][j].size(); ++k) f.at(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)) = c[i][j][k];
        return f;
    }

    double& at(int i, int j, int k) { return coeff[static_cast<std::size_t>((i * kMaxDim + j) * kMaxDim + k)]; }
    double at(int i, int j, int k) const { return coeff[static_cast<std::size_t>((i * kMaxDim + j) * kMaxDim + k)]; }

    double component(int i, int j, int k, double /*t*/, const Vec& x) const {
        switch (kind) {
            case Kind::zero: return 0.0;
            case Kind::constant: return at(i, j, k);
            case Kind::tanh_scaled: return at(i, j, k) * std::tanh(x[static_cast<std::size_t>(i)]);
        }
        return 0.0;
    }

    bool symmetric(int n, int d) const {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    if (at(i, j, k) != at(i, k, j)) return false;
        return true;
    }
};

/// Diffusion sigma(t, x), an n x d matrix.
struct DiffusionField {
    enum class Kind { constant, modulated };
    Kind kind = Kind::constant;
    SmallMat base = SmallMat::identity(1);
    double amplitude = 0.0;  // modulated: sigma = base * (1 + amplitude * sin(x_1))

    static DiffusionField constant(const SmallMat& s) { return {Kind::constant, s, 0.0}; }
    static DiffusionField modulated(const SmallMat& s, double amplitude) { return {Kind::modulated, s, amplitude}; }

    double factor(const Vec& x) const {
        return kind == Kind::modulated ? 1.0 + amplitude * std::sin(x[0]) : 1.0;
    }

    SmallMat at(double /*t*/, const Vec& x) const {
        if (kind == Kind::constant) return base;
        SmallMat s = base;
        const double f = factor(x);
        for (int i = 0; i < s.rows(); ++i)
            for (int j = 0; j < s.cols(); ++j) s(i, j) *= f;
        return s;
    }
};

/**
 * Declarative coefficients of the G-SDE
 *   dX = b dt + h^{jk} d<B^j, B^k> + sigma dB.
 *
 * The declared CoefficientBounds are spot-checked at 10^4 random (t, x)
 * points on construction; a violated bound throws.
 */
class SdeSpec {
public:
    static constexpr int kSpotChecks = 10000;

    SdeSpec(int n, int d, DriftField drift, CorrectionField correction, DiffusionField diffusion,
            CoefficientBounds bounds, std::uint64_t check_seed = 20240601)
        : n_(n), d_(d), drift_(drift), correction_(correction), diffusion_(diffusion), bounds_(bounds) {
        if (n < 1 || d < 1 || n > kMaxDim || d > kMaxDim) throw std::invalid_argument("SdeSpec: dimensions out of range");
        if (diffusion.base.rows() != n || diffusion.base.cols() != d) {
            throw std::invalid_argument("SdeSpec: sigma must be n x d");
        }
        if (!correction.symmetric(n, d)) throw std::invalid_argument("SdeSpec: h^{jk} must equal h^{kj}");
        if (diffusion.kind == DiffusionField::Kind::modulated && !(std::abs(diffusion.amplitude) < 1.0)) {
            throw std::invalid_argument("SdeSpec: modulation amplitude must be < 1");
        }
        if (bounds_.n != n || bounds_.d != d) throw std::invalid_argument("SdeSpec: bounds dimensions mismatch");
        bounds_.validate();
        spot_check(check_seed);
    }

    /// Driftless G-Brownian motion in R^d (sigma = I, b = h = 0).
    static SdeSpec brownian(int d) {
        return SdeSpec(d, d, DriftField::zero(), CorrectionField::zero(),
                       DiffusionField::constant(SmallMat::identity(d)), analytic_bounds(d, d, DriftField::zero(), CorrectionField::zero(), DiffusionField::constant(SmallMat::identity(d))));
    }

    /// Builds the spec with bounds derived from the closed-form coefficient families.
    static SdeSpec with_analytic_bounds(int n, int d, DriftField drift, CorrectionField correction,
                                        DiffusionField diffusion) {
        return SdeSpec(n, d, drift, correction, diffusion, analytic_bounds(n, d, drift, correction, diffusion));
    }

    /**
     * Bounds implied by the coefficient families. Ellipticity uses
     * sigma sigma^T when n <= d and sigma^T sigma otherwise; the modulation
     * factor (1 + a sin x_1) rescales all of them by (1 -+ |a|)^2.
     */
    static CoefficientBounds analytic_bounds(int n, int d, const DriftField& drift, const CorrectionField& corr,
                                             const DiffusionField& diff) {
        CoefficientBounds b;
        b.n = n;
        b.d = d;
        const SymMatrix gram = n <= d ? outer_gram(diff.base) : inner_gram(diff.base);
        const auto e = jacobi_eigen(gram);
        const double amp = diff.kind == DiffusionField::Kind::modulated ? std::abs(diff.amplitude) : 0.0;
        const double lo_f = (1.0 - amp) * (1.0 - amp);
        const double hi_f = (1.0 + amp) * (1.0 + amp);
        b.lambda = e.values.front() * lo_f;
        b.Lambda = e.values.back() * hi_f;
        double rmin = 1e300, rmax = 0.0;
        for (int i = 0; i < n; ++i) {
            double r = 0.0;
            for (int j = 0; j < d; ++j) r += diff.base(i, j) * diff.base(i, j);
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
        b.gamma_row = rmin * lo_f;
        b.Gamma_row = rmax * hi_f;
        b.lambda_bar = b.lambda;
        b.Lambda_bar = b.Lambda;
        b.C_prime = amp * diff.base.frobenius();

        double l_b = 0.0, c_b = 0.0, l_h = 0.0, c_h = 0.0;
        switch (drift.kind) {
            case DriftField::Kind::zero: break;
            case DriftField::Kind::constant:
                for (int i = 0; i < n; ++i) l_b = std::max(l_b, std::abs(drift.level[static_cast<std::size_t>(i)]));
                break;
            case DriftField::Kind::tanh_reversion:
                l_b = std::abs(drift.rate);
                c_b = std::abs(drift.rate);
                break;
        }
        if (corr.kind != CorrectionField::Kind::zero) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k) l_h = std::max(l_h, std::abs(corr.at(i, j, k)));
            if (corr.kind == CorrectionField::Kind::tanh_scaled) {
                // |h^{jk}(x) - h^{jk}(x')| <= |c^{jk}| |x - x'| (Euclidean over the n components)
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k) {
                        double col = 0.0;
                        for (int i = 0; i < n; ++i) col += corr.at(i, j, k) * corr.at(i, j, k);
                        c_h = std::max(c_h, std::sqrt(col));
                    }
            }
        }
        b.L = std::max(l_b, l_h);
        b.C = c_b + c_h;
        return b;
    }

    int n() const { return n_; }
    int d() const { return d_; }
    const DriftField& drift() const { return drift_; }
    const CorrectionField& correction() const { return correction_; }
    const DiffusionField& diffusion() const { return diffusion_; }
    const CoefficientBounds& bounds() const { return bounds_; }

    bool driftless() const {
        return drift_.kind == DriftField::Kind::zero && correction_.kind == CorrectionField::Kind::zero;
    }

    double b(int i, double t, const Vec& x) const { return drift_.component(i, t, x); }
    double h(int i, int j, int k, double t, const Vec& x) const { return correction_.component(i, j, k, t, x); }
    SmallMat sigma(double t, const Vec& x) const { return diffusion_.at(t, x); }

    /**
     * delta_{a,T} = max over sampled t in [0, T] of max(|h^{jk}(t, a)|, |b(t, a)|),
     * using `samples` equispaced times. |.| is the Euclidean norm in R^n.
     */
    double coefficient_sup(const Vec& a, double T, int samples = 1001) const {
        if (samples < 2) throw std::invalid_argument("coefficient_sup: need at least 2 samples");
        double best = 0.0;
        for (int s = 0; s < samples; ++s) {
            const double t = T * s / (samples - 1);
            double nb = 0.0;
            for (int i = 0; i < n_; ++i) nb += b(i, t, a) * b(i, t, a);
            best = std::max(best, std::sqrt(nb));
            for (int j = 0; j < d_; ++j)
                for (int k = 0; k < d_; ++k) {
                    double nh = 0.0;
                    for (int i = 0; i < n_; ++i) nh += h(i, j, k, t, a) * h(i, j, k, t, a);
                    best = std::max(best, std::sqrt(nh));
                }
        }
        return best;
    }

private:
    void spot_check(std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> xs(-10.0, 10.0);
        std::uniform_real_distribution<double> ts(0.0, 10.0);
        const double rel = 1e-9;
        for (int s = 0; s < kSpotChecks; ++s) {
            Vec x{};
            for (int i = 0; i < n_; ++i) x[static_cast<std::size_t>(i)] = xs(rng);
            const double t = ts(rng);
            const SmallMat sg = sigma(t, x);
            const SymMatrix gram = n_ <= d_ ? outer_gram(sg) : inner_gram(sg);
            const auto e = jacobi_eigen(gram);
            if (e.values.front() < bounds_.lambda * (1.0 - rel) || e.values.back() > bounds_.Lambda * (1.0 + rel)) {
                throw std::invalid_argument("SdeSpec: declared ellipticity bounds violated at a sampled point");
            }
            for (int i = 0; i < n_; ++i) {
                double r = 0.0;
                for (int j = 0; j < d_; ++j) r += sg(i, j) * sg(i, j);
                if (r < bounds_.gamma_row * (1.0 - rel) || r > bounds_.Gamma_row * (1.0 + rel)) {
                    throw std::invalid_argument("SdeSpec: declared row bounds violated at a sampled point");
                }
                if (std::abs(b(i, t, x)) > bounds_.L * (1.0 + rel) + 1e-300) {
                    throw std::invalid_argument("SdeSpec: declared drift bound L violated at a sampled point");
                }
                for (int j = 0; j < d_; ++j)
                    for (int k = 0; k < d_; ++k)
                        if (std::abs(h(i, j, k, t, x)) > bounds_.L * (1.0 + rel) + 1e-300) {
                            throw std::invalid_argument("SdeSpec: declared correction bound L violated at a sampled point");
                        }
            }
        }
    }

    int n_;
    int d_;
    DriftField drift_;
    CorrectionField correction_;
    DiffusionField diffusion_;
    CoefficientBounds bounds_;
};

}  // namespace gexpect
