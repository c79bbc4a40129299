#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "gexpect/linalg.hpp"
#include "gexpect/sublinear.hpp"

namespace gexpect {

/**
 * Declared structural bounds on SDE / Ito-process coefficients.
 *
 * lambda, Lambda   ellipticity of sigma sigma^T (n <= d) or sigma^T sigma (n > d)
 * gamma_row, ...   per-row bounds on |sigma_i|^2
 * L                sup bound on |b_i| and |h_i^{jk}|
 * C, C_prime       Lipschitz constants of (b, h) and of sigma (Frobenius norm)
 * lambda_bar, ...  ellipticity of sigma sigma^T for G-Ito processes
 */
struct CoefficientBounds {
    int n = 1;
    int d = 1;
    double lambda = 1.0;
    double Lambda = 1.0;
    double gamma_row = 1.0;
    double Gamma_row = 1.0;
    double L = 0.0;
    double C = 0.0;
    double C_prime = 0.0;
    double lambda_bar = 1.0;
    double Lambda_bar = 1.0;

    void validate() const {
        auto fail = [](const std::string& what) { throw std::invalid_argument("CoefficientBounds: " + what); };
        if (n < 1 || d < 1 || n > kMaxDim || d > kMaxDim) fail("dimensions out of range");
        if (!(lambda > 0.0) || !(lambda <= Lambda)) fail("need 0 < lambda <= Lambda");
        if (!(gamma_row > 0.0) || !(gamma_row <= Gamma_row)) fail("need 0 < gamma_row <= Gamma_row");
        if (!(L >= 0.0) || !(C >= 0.0) || !(C_prime >= 0.0)) fail("L, C, C_prime must be non-negative");
        if (!(lambda_bar > 0.0) || !(lambda_bar <= Lambda_bar)) fail("need 0 < lambda_bar <= Lambda_bar");
    }
};

/// Constants of the explicit Gaussian-type supersolution.
struct SupersolutionConstants {
    double alpha = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;  // length of the window [T - epsilon, T] where the bound holds
    double kappa = 0.0;
    double delta_aT = 0.0;
    double m_min = 0.0;    // == 8 kappa
    double T = 0.0;

    /// (1 + m (T ^ epsilon))^{-alpha}
    double decay_bound(double m) const { return std::pow(1.0 + m * std::min(T, epsilon), -alpha); }
};

namespace detail {

inline void require_positive_time(double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("horizon T must be positive and finite");
}

inline double window(double kappa, double T) { return kappa > 0.0 ? std::min(1.0 / (8.0 * kappa), T) : T; }

}  // namespace detail

/**
 * Constants for the full G-SDE (drift b and correction h present):
 *   alpha = (n^d) lambda s_lo^2 / (8 d s_hi^2 Lambda),   beta = 1 / (2 d s_hi^2 Lambda)
 *   kappa = C (s_hi^2 d sqrt(d) + 1) + delta^2 (s_hi^2 d sqrt(d) + 1)^2 / ((n^d) lambda s_lo^2)
 *   epsilon = (8 kappa)^{-1} ^ T,  m_min = 8 kappa
 */
inline SupersolutionConstants lemma32_constants(const CoefficientBounds& bounds, const VolatilityBand& band,
                                                double T, double delta_aT) {
    bounds.validate();
    detail::require_positive_time(T);
    if (!(delta_aT >= 0.0)) throw std::invalid_argument("lemma32_constants: delta_aT must be non-negative");
    const double d = bounds.d;
    const double nd = std::min(bounds.n, bounds.d);
    const double growth = band.high() * d * std::sqrt(d) + 1.0;
    SupersolutionConstants k;
    k.alpha = nd * bounds.lambda * band.low() / (8.0 * d * band.high() * bounds.Lambda);
    k.beta = 1.0 / (2.0 * d * band.high() * bounds.Lambda);
    k.kappa = bounds.C * growth + delta_aT * delta_aT * growth * growth / (nd * bounds.lambda * band.low());
    k.epsilon = detail::window(k.kappa, T);
    k.delta_aT = delta_aT;
    k.m_min = 8.0 * k.kappa;
    k.T = T;
    return k;
}

/// Constants when b = h = 0: twice larger alpha and beta, no time window restriction.
inline SupersolutionConstants driftless_constants(const CoefficientBounds& bounds, const VolatilityBand& band,
                                                  double T) {
    bounds.validate();
    detail::require_positive_time(T);
    const double d = bounds.d;
    const double nd = std::min(bounds.n, bounds.d);
    SupersolutionConstants k;
    k.alpha = nd * bounds.lambda * band.low() / (2.0 * d * band.high() * bounds.Lambda);
    k.beta = 1.0 / (d * band.high() * bounds.Lambda);
    k.kappa = 0.0;
    k.epsilon = T;
    k.m_min = 0.0;
    k.T = T;
    return k;
}

/// Constants of the single-coordinate supersolution built from per-row bounds (gamma_row, Gamma_row, L).
inline SupersolutionConstants lemma36_constants(const CoefficientBounds& bounds, const VolatilityBand& band,
                                                double T) {
    bounds.validate();
    detail::require_positive_time(T);
    const double d = bounds.d;
    const double growth = band.high() * d * std::sqrt(d) + 1.0;
    SupersolutionConstants k;
    k.alpha = bounds.gamma_row * band.low() / (8.0 * band.high() * bounds.Gamma_row);
    k.beta = 1.0 / (2.0 * band.high() * bounds.Gamma_row);
    k.kappa = bounds.L * bounds.L * growth * growth / (bounds.gamma_row * band.low());
    k.epsilon = detail::window(k.kappa, T);
    k.delta_aT = bounds.L;
    k.m_min = 8.0 * k.kappa;
    k.T = T;
    return k;
}

/**
 * (1 + m (T - t))^{-alpha} exp(-m beta |x - a|^2 / (2 (1 + m (T - t))))
 *
 * With `coordinate` set only |x_i - a_i|^2 enters the exponent.
 */
inline double supersolution_value(double t, const Vec& x, int n, const SupersolutionConstants& k, const Vec& a,
                                  double m, std::optional<int> coordinate = std::nullopt) {
    if (t > k.T) throw std::invalid_argument("supersolution_value: t must not exceed T");
    if (m < 0.0) throw std::invalid_argument("supersolution_value: m must be non-negative");
    double r2 = 0.0;
    if (coordinate) {
        const int i = *coordinate;
        if (i < 0 || i >= n) throw std::invalid_argument("supersolution_value: coordinate out of range");
        r2 = (x[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)]) *
             (x[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)]);
    } else {
        for (int i = 0; i < n; ++i) {
            const double dx = x[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)];
            r2 += dx * dx;
        }
    }
    const double s = 1.0 + m * (k.T - t);
    return std::pow(s, -k.alpha) * std::exp(-m * k.beta * r2 / (2.0 * s));
}

}  // namespace gexpect
