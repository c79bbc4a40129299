#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gexpect/linalg.hpp"

namespace gexpect {

/**
 * Closed subsets of R^n used as capacity events and occupation regions.
 *
 * signed_gap(x) is <= 0 exactly on the set and grows like a distance outside
 * it, which is what the mollified indicators are built from.
 */
struct EventSet {
    enum class Kind { everything, ball, cube_boundary_shell, sphere_shell, curve_shell };
    Kind kind = Kind::everything;
    int n = 1;
    Vec center{};    // ball / sphere centre
    double radius = 0.0;
    Vec lower{};     // cube corner a
    Vec upper{};     // cube corner b
    double eps = 0.0;
    // curve_shell: {|f(x)| <= eps} with f(x) = x_n - amplitude sin(frequency x_1) - offset (n = 2)
    // or f(x) = x_1 - offset (n = 1)
    double amplitude = 0.0;
    double frequency = 1.0;
    double offset = 0.0;

    static EventSet everything(int n) {
        EventSet e;
        e.n = n;
        return e;
    }
    static EventSet ball(int n, const Vec& y, double eps) {
        if (!(eps >= 0.0)) throw std::invalid_argument("EventSet::ball: radius must be non-negative");
        EventSet e;
        e.kind = Kind::ball;
        e.n = n;
        e.center = y;
        e.radius = eps;
        return e;
    }
    static EventSet cube_boundary_shell(int n, const Vec& a, const Vec& b, double eps) {
        for (int i = 0; i < n; ++i)
            if (!(a[static_cast<std::size_t>(i)] <= b[static_cast<std::size_t>(i)]))
                throw std::invalid_argument("EventSet::cube_boundary_shell: need a <= b");
        EventSet e;
        e.kind = Kind::cube_boundary_shell;
        e.n = n;
        e.lower = a;
        e.upper = b;
        e.eps = eps;
        return e;
    }
    static EventSet sphere_shell(int n, const Vec& c, double radius, double eps) {
        EventSet e;
        e.kind = Kind::sphere_shell;
        e.n = n;
        e.center = c;
        e.radius = radius;
        e.eps = eps;
        return e;
    }
    static EventSet curve_shell(int n, double amplitude, double frequency, double offset, double eps) {
        if (n > 2) throw std::invalid_argument("EventSet::curve_shell: only n <= 2");
        EventSet e;
        e.kind = Kind::curve_shell;
        e.n = n;
        e.amplitude = amplitude;
        e.frequency = frequency;
        e.offset = offset;
        e.eps = eps;
        return e;
    }

    double curve_level(const Vec& x) const {
        return n == 1 ? x[0] - offset : x[1] - amplitude * std::sin(frequency * x[0]) - offset;
    }

    double signed_gap(const Vec& x) const {
        switch (kind) {
            case Kind::everything: return -std::numeric_limits<double>::infinity();
            case Kind::ball: return distance(x, center) - radius;
            case Kind::sphere_shell: return std::abs(distance(x, center) - radius) - eps;
            case Kind::cube_boundary_shell: return cube_boundary_distance(x) - eps;
            case Kind::curve_shell: return std::abs(curve_level(x)) - eps;
        }
        return 0.0;
    }

    bool contains(const Vec& x) const { return signed_gap(x) <= 0.0; }

    /// Half-extent of a box around `anchor()` containing the set plus `pad`.
    double reach(double pad) const {
        switch (kind) {
            case Kind::everything: return pad;
            case Kind::ball: return radius + pad;
            case Kind::sphere_shell: return radius + eps + pad;
            case Kind::cube_boundary_shell: {
                double r = 0.0;
                for (int i = 0; i < n; ++i)
                    r = std::max(r, 0.5 * (upper[static_cast<std::size_t>(i)] - lower[static_cast<std::size_t>(i)]));
                return r + eps + pad;
            }
            case Kind::curve_shell: return std::abs(offset) + std::abs(amplitude) + eps + pad;
        }
        return pad;
    }

    Vec anchor() const {
        if (kind == Kind::cube_boundary_shell) {
            Vec c{};
            for (int i = 0; i < n; ++i)
                c[static_cast<std::size_t>(i)] = 0.5 * (lower[static_cast<std::size_t>(i)] + upper[static_cast<std::size_t>(i)]);
            return c;
        }
        if (kind == Kind::ball || kind == Kind::sphere_shell) return center;
        return Vec{};
    }

    /// Curve shells are unbounded along x_1 for n = 2.
    bool bounded() const { return kind != Kind::everything && !(kind == Kind::curve_shell && n == 2); }

private:
    double distance(const Vec& x, const Vec& y) const {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double dx = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
            s += dx * dx;
        }
        return std::sqrt(s);
    }

    double cube_boundary_distance(const Vec& x) const {
        bool inside = true;
        double outside_sq = 0.0;
        double inner = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double lo = lower[k] - x[k];
            const double hi = x[k] - upper[k];
            if (lo > 0.0) {
                inside = false;
                outside_sq += lo * lo;
            } else if (hi > 0.0) {
                inside = false;
                outside_sq += hi * hi;
            } else {
                inner = std::min(inner, std::min(-lo, -hi));
            }
        }
        return inside ? inner : std::sqrt(outside_sq);
    }
};

/// C^2 quintic smoothstep on [0, 1]: 0 at 0, 1 at 1, flat at both ends.
inline double smoothstep5(double s) {
    s = std::clamp(s, 0.0, 1.0);
    return s * s * s * (s * (s * 6.0 - 15.0) + 10.0);
}

/// Maximum slope of smoothstep5.
inline constexpr double kSmoothstepSlope = 15.0 / 8.0;

/// 1 on the set, 0 at gap >= width, C^2 transition in between; dominates the indicator.
inline double mollified_indicator(const EventSet& e, double width, const Vec& x) {
    const double gap = e.signed_gap(x);
    if (gap <= 0.0) return 1.0;
    if (gap >= width) return 0.0;
    return smoothstep5(1.0 - gap / width);
}

/**
 * Scalar function phi: R^n -> R used by occupation integrands and the
 * dominated-convergence families. Every kind has polynomial growth
 * |phi(x)| <= growth_c (1 + |x|^growth_l).
 */
struct ScalarField {
    enum class Kind { zero, constant, sign, clamp_linear, indicator, coordinate };
    Kind kind = Kind::zero;
    double value = 0.0;  // constant level, clamp slope k, or indicator scale
    int coord = 0;
    EventSet event;

    static ScalarField zero() { return {}; }
    static ScalarField constant(double c) { return {Kind::constant, c, 0, {}}; }
    /// sign(x_i) with sign(0) = 0.
    static ScalarField sign(int coord = 0) { return {Kind::sign, 0.0, coord, {}}; }
    /// clamp(k x_i, -1, 1), a continuous approximation of sign at scale 1/k.
    static ScalarField clamp_linear(double k, int coord = 0) { return {Kind::clamp_linear, k, coord, {}}; }
    static ScalarField indicator(const EventSet& e, double scale = 1.0) { return {Kind::indicator, scale, 0, e}; }
    static ScalarField coordinate(int coord) { return {Kind::coordinate, 0.0, coord, {}}; }

    double operator()(const Vec& x) const {
        const double xi = x[static_cast<std::size_t>(coord)];
        switch (kind) {
            case Kind::zero: return 0.0;
            case Kind::constant: return value;
            case Kind::sign: return xi > 0.0 ? 1.0 : (xi < 0.0 ? -1.0 : 0.0);
            case Kind::clamp_linear: return std::clamp(value * xi, -1.0, 1.0);
            case Kind::indicator: return event.contains(x) ? value : 0.0;
            case Kind::coordinate: return xi;
        }
        return 0.0;
    }

    double growth_c() const {
        switch (kind) {
            case Kind::zero: return 0.0;
            case Kind::constant: return std::abs(value);
            case Kind::indicator: return std::abs(value);
            case Kind::coordinate: return 1.0;
            default: return 1.0;
        }
    }
    double growth_l() const { return kind == Kind::coordinate ? 1.0 : 0.0; }
};

/**
 * Running integrand for occupation functionals: scale * |phi(x) - psi(x)|^p,
 * with psi = 0 for plain integrands. Evaluated pathwise as a trapezoid sum.
 */
struct Integrand {
    ScalarField phi;
    ScalarField psi;
    double power = 1.0;
    double scale = 1.0;

    static Integrand of(const ScalarField& f, double scale = 1.0) { return {f, ScalarField::zero(), 1.0, scale}; }
    static Integrand indicator(const EventSet& e, double scale = 1.0) {
        return of(ScalarField::indicator(e), scale);
    }
    static Integrand constant(double c) { return of(ScalarField::constant(1.0), c); }
    static Integrand power_difference(const ScalarField& a, const ScalarField& b, double p) { return {a, b, p, 1.0}; }

    double operator()(const Vec& x) const {
        const double diff = std::abs(phi(x) - psi(x));
        if (power == 1.0) return scale * diff;
        return scale * std::pow(diff, power);
    }
};

}  // namespace gexpect
