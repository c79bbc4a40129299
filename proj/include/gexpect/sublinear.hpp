#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gexpect/linalg.hpp"

namespace gexpect {

/**
 * Variance band [sigma_low_sq, sigma_high_sq] of a non-degenerate G.
 *
 * The uncertainty set is {gamma symmetric : sigma_low_sq I <= gamma <= sigma_high_sq I}.
 */
class VolatilityBand {
public:
    VolatilityBand(double sigma_low_sq, double sigma_high_sq) : low_(sigma_low_sq), high_(sigma_high_sq) {
        if (!(sigma_low_sq > 0.0) || !(sigma_high_sq >= sigma_low_sq) || !std::isfinite(sigma_high_sq)) {
            throw std::invalid_argument("VolatilityBand: need 0 < sigma_low_sq <= sigma_high_sq < inf, got [" +
                                        std::to_string(sigma_low_sq) + ", " + std::to_string(sigma_high_sq) + "]");
        }
    }

    double low() const { return low_; }
    double high() const { return high_; }
    double sigma_high() const { return std::sqrt(high_); }
    double sigma_low() const { return std::sqrt(low_); }
    double mid() const { return 0.5 * (low_ + high_); }
    bool degenerate() const { return low_ == high_; }

    /// True when low I <= gamma <= high I up to tol on the eigenvalues.
    bool admits(const SymMatrix& gamma, double tol = 1e-10) const {
        const auto e = jacobi_eigen(gamma);
        return e.values.front() >= low_ - tol && e.values.back() <= high_ + tol;
    }

    /// Value of the maximising gamma along an eigen-direction with eigenvalue lam.
    double extremal(double lam) const { return lam > 0.0 ? high_ : low_; }

    friend bool operator==(const VolatilityBand& a, const VolatilityBand& b) {
        return a.low_ == b.low_ && a.high_ == b.high_;
    }

private:
    double low_;
    double high_;
};

namespace detail {

inline double g_scalar(double a, const VolatilityBand& band) {
    return 0.5 * (a > 0.0 ? band.high() * a : band.low() * a);
}

// 2x2 closed form without trigonometry: gamma* = g2 I + (g1 - g2) P1, where
// P1 = (A - lam2 I) / (lam1 - lam2) projects on the top eigenvector.
struct Argmax2 {
    double value, g00, g01, g11;
};

inline Argmax2 argmax2(double a, double b, double c, const VolatilityBand& band) {
    const double mean = 0.5 * (a + c);
    const double r = std::hypot(0.5 * (a - c), b);
    const double lam1 = mean + r, lam2 = mean - r;
    const double g1 = band.extremal(lam1), g2 = band.extremal(lam2);
    const double k = r > 0.0 ? (g1 - g2) / (2.0 * r) : 0.0;
    return {g_scalar(lam1, band) + g_scalar(lam2, band), g2 + k * (a - lam2), k * b, g2 + k * (c - lam2)};
}

}  // namespace detail

/**
 * G(A) = 1/2 sup{ tr(gamma A) : gamma in the band } for the interval uncertainty set.
 *
 * Closed form: 1/2 (sigma_high_sq * sum of positive eigenvalues
 *                  + sigma_low_sq * sum of negative eigenvalues).
 */
inline double g_eval(const SymMatrix& a, const VolatilityBand& band) {
    switch (a.dim()) {
        case 1:
            return detail::g_scalar(a(0, 0), band);
        case 2: {
            const double mean = 0.5 * (a(0, 0) + a(1, 1));
            const double r = std::hypot(0.5 * (a(0, 0) - a(1, 1)), a(0, 1));
            return detail::g_scalar(mean + r, band) + detail::g_scalar(mean - r, band);
        }
        default: {
            const auto e = jacobi_eigen(a);
            double g = 0.0;
            for (double lam : e.values) g += detail::g_scalar(lam, band);
            return g;
        }
    }
}

/// G(A) together with a maximising covariance gamma*.
struct GArgmax {
    double value;
    SymMatrix gamma;
};

inline GArgmax g_eval_argmax(const SymMatrix& a, const VolatilityBand& band) {
    const int d = a.dim();
    if (d == 1) {
        SymMatrix g(1);
        g.set(0, 0, band.extremal(a(0, 0)));
        return {detail::g_scalar(a(0, 0), band), g};
    }
    if (d == 2) {
        const auto e = detail::argmax2(a(0, 0), a(0, 1), a(1, 1), band);
        SymMatrix g(2);
        g.set(0, 0, e.g00);
        g.set(1, 1, e.g11);
        g.set(0, 1, e.g01);
        return {e.value, g};
    }
    const auto e = jacobi_eigen(a);
    SymMatrix g(d);
    double value = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) {
                acc += e.vectors(i, k) * band.extremal(e.values[static_cast<std::size_t>(k)]) * e.vectors(j, k);
            }
            g.set(i, j, acc);
        }
    }
    for (double lam : e.values) value += detail::g_scalar(lam, band);
    return {value, g};
}

/// 1/2 tr(gamma A).
inline double half_trace_product(const SymMatrix& gamma, const SymMatrix& a) {
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) s += gamma(i, j) * a(j, i);
    return 0.5 * s;
}

/**
 * Measured slack of the structural inequalities of a non-degenerate G.
 *
 * Slacks are oriented so that a non-negative value means the inequality holds:
 *   lower_slack = G(A) - G(B) - 1/2 sigma_low_sq tr(A - B)
 *   upper_slack = 1/2 sigma_high_sq tr(A - B) - (G(A) - G(B))
 *   norm_slack  = 1/2 sigma_high_sq sqrt(d) sqrt(tr(A A^T)) - |G(A)|
 */
struct StructuralCheck {
    bool sandwich_checked = false;  // false when A - B is not PSD
    double g_difference = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    double lower_slack = 0.0;
    double upper_slack = 0.0;
    double norm_bound = 0.0;
    double norm_slack = 0.0;
    double min_eig_difference = 0.0;

    bool holds(double tol = 1e-10) const {
        const bool sandwich = !sandwich_checked || (lower_slack >= -tol && upper_slack >= -tol);
        return sandwich && norm_slack >= -tol;
    }
};

inline StructuralCheck g_structural_check(const SymMatrix& a, const SymMatrix& b, const VolatilityBand& band,
                                          double psd_tol = 1e-10) {
    if (a.dim() != b.dim()) throw std::invalid_argument("g_structural_check: dimension mismatch");
    StructuralCheck out;
    const SymMatrix diff = a - b;
    out.min_eig_difference = min_eigenvalue(diff);
    const double ga = g_eval(a, band);
    if (out.min_eig_difference >= -psd_tol) {
        out.sandwich_checked = true;
        out.g_difference = ga - g_eval(b, band);
        out.lower_bound = 0.5 * band.low() * diff.trace();
        out.upper_bound = 0.5 * band.high() * diff.trace();
        out.lower_slack = out.g_difference - out.lower_bound;
        out.upper_slack = out.upper_bound - out.g_difference;
    }
    out.norm_bound = 0.5 * band.high() * std::sqrt(static_cast<double>(a.dim())) * std::sqrt(a.frobenius_sq());
    out.norm_slack = out.norm_bound - std::abs(ga);
    return out;
}

}  // namespace gexpect
