#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "gexpect/payoff.hpp"
#include "gexpect/sde.hpp"
#include "gexpect/sublinear.hpp"

namespace gexpect {

/// Thrown when a grid violates the explicit-scheme stability bound.
class CflViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Uniform space-time grid over the box [lo, hi]^n and [0, T] with nt steps.
 *
 * Stability of the explicit scheme requires
 *   dt <= cfl_safety * dx^2 / (d * sigma_high_sq * Lambda * n^2).
 */
struct GridSpec {
    static constexpr double kCflSafety = 0.9;
    static constexpr double kBoxQuantum = 1.0 / 64.0;  // box bounds are exact in float32
    static constexpr double kBufferWidths = 6.0;

    int n = 1;
    double lo = -1.0;
    double hi = 1.0;
    int nx = 3;
    double T = 1.0;
    int nt = 1;

    double dx() const { return (hi - lo) / (nx - 1); }
    double dt() const { return T / nt; }
    double x(int i) const { return i == nx - 1 ? hi : lo + i * dx(); }
    std::size_t nodes() const {
        return n == 1 ? static_cast<std::size_t>(nx) : static_cast<std::size_t>(nx) * static_cast<std::size_t>(nx);
    }

    static double cfl_limit(const SdeSpec& sde, const VolatilityBand& band, double dx) {
        const double n = sde.n();
        return kCflSafety * dx * dx / (sde.d() * band.high() * sde.bounds().Lambda * n * n);
    }

    /// dt relative to the stability limit; <= 1 for a valid grid.
    double cfl_ratio(const SdeSpec& sde, const VolatilityBand& band) const {
        return dt() / cfl_limit(sde, band, dx());
    }

    void validate(const SdeSpec& sde, const VolatilityBand& band) const {
        if (n < 1 || n > 2) throw std::invalid_argument("GridSpec: only n <= 2 is supported");
        if (sde.n() != n) throw std::invalid_argument("GridSpec: grid and SDE dimensions differ");
        if (nx < 3) throw std::invalid_argument("GridSpec: need at least 3 points per axis");
        if (!(hi > lo)) throw std::invalid_argument("GridSpec: empty box");
        if (!(T > 0.0) || nt < 1) throw std::invalid_argument("GridSpec: need T > 0 and nt >= 1");
        if (cfl_ratio(sde, band) > 1.0 + 1e-12) {
            throw CflViolation("GridSpec: dt = " + std::to_string(dt()) + " exceeds the stability limit " +
                               std::to_string(cfl_limit(sde, band, dx())));
        }
    }

    /// Smallest nt that is a multiple of `multiple` and satisfies the stability bound.
    static int stable_steps(const SdeSpec& sde, const VolatilityBand& band, double dx, double T, int multiple = 64) {
        const double limit = cfl_limit(sde, band, dx);
        int nt = static_cast<int>(std::ceil(T / limit - 1e-9));
        nt = std::max(nt, 1);
        return ((nt + multiple - 1) / multiple) * multiple;
    }

    /// Buffer added around the payoff support: 6 sigma_high sqrt(Lambda T).
    static double buffer(const SdeSpec& sde, const VolatilityBand& band, double T) {
        return kBufferWidths * band.sigma_high() * std::sqrt(std::max(1.0, sde.bounds().Lambda) * T);
    }

    /**
     * Box enclosing the payoff support, the point of interest and a diffusion
     * buffer, spaced at roughly dx_target with an odd node count.
     */
    static GridSpec fitted(const SdeSpec& sde, const VolatilityBand& band, const TerminalPayoff& payoff, double T,
                           double dx_target, const std::optional<Vec>& focus = std::nullopt) {
        if (!(dx_target > 0.0)) throw std::invalid_argument("GridSpec::fitted: dx must be positive");
        const int n = sde.n();
        const double pad = buffer(sde, band, T);
        const double reach = payoff.reach();
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < n; ++i) {
            const double c = payoff.anchor()[static_cast<std::size_t>(i)];
            lo = std::min(lo, c - reach - pad);
            hi = std::max(hi, c + reach + pad);
            if (focus) {
                const double f = (*focus)[static_cast<std::size_t>(i)];
                lo = std::min(lo, f - pad);
                hi = std::max(hi, f + pad);
            }
        }
        lo = std::floor(lo / kBoxQuantum) * kBoxQuantum;
        hi = std::ceil(hi / kBoxQuantum) * kBoxQuantum;
        int cells = static_cast<int>(std::ceil((hi - lo) / dx_target));
        cells += cells % 2;
        return with_nodes(sde, band, n, lo, hi, cells + 1, T);
    }

    /// Grid with a given node count per axis and the stable step count.
    static GridSpec with_nodes(const SdeSpec& sde, const VolatilityBand& band, int n, double lo, double hi, int nx,
                               double T, int step_multiple = 64) {
        GridSpec g;
        g.n = n;
        g.lo = lo;
        g.hi = hi;
        g.nx = nx;
        g.T = T;
        g.nt = stable_steps(sde, band, g.dx(), T, step_multiple);
        g.validate(sde, band);
        return g;
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

}  // namespace gexpect
