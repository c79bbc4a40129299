#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gexpect/events.hpp"
#include "gexpect/linalg.hpp"

namespace gexpect {

/**
 * Bounded terminal condition Phi of the G-PDE.
 *
 * Every kind records sup|Phi| and a Lipschitz constant, and reports a support
 * box (anchor +- reach) outside of which Phi is below 1e-16 or constant.
 */
class TerminalPayoff {
public:
    enum class Kind { gaussian_bump, coordinate_bump, mollified_indicator, constant, table };

    /// exp(-m beta |x - a|^2 / 2)
    static TerminalPayoff gaussian_bump(int n, double m, double beta, const Vec& a) {
        if (!(m >= 0.0) || !(beta > 0.0)) throw std::invalid_argument("gaussian_bump: need m >= 0, beta > 0");
        TerminalPayoff p(Kind::gaussian_bump, n);
        p.m_ = m;
        p.beta_ = beta;
        p.center_ = a;
        p.sup_ = 1.0;
        p.lipschitz_ = std::sqrt(m * beta) * std::exp(-0.5);
        return p;
    }

    /// exp(-m beta |x_i - a_i|^2 / 2)
    static TerminalPayoff coordinate_bump(int n, double m, double beta, int i, double a_i) {
        if (i < 0 || i >= n) throw std::invalid_argument("coordinate_bump: coordinate out of range");
        TerminalPayoff p = gaussian_bump(n, m, beta, Vec{});
        p.kind_ = Kind::coordinate_bump;
        p.coord_ = i;
        p.center_[static_cast<std::size_t>(i)] = a_i;
        return p;
    }

    static TerminalPayoff mollified_indicator(const EventSet& event, double width) {
        if (!(width > 0.0)) throw std::invalid_argument("mollified_indicator: width must be positive");
        TerminalPayoff p(Kind::mollified_indicator, event.n);
        p.event_ = event;
        p.width_ = width;
        p.sup_ = 1.0;
        p.lipschitz_ = kSmoothstepSlope / width;
        p.center_ = event.anchor();
        return p;
    }

    static TerminalPayoff constant(int n, double c) {
        TerminalPayoff p(Kind::constant, n);
        p.level_ = c;
        p.sup_ = std::abs(c);
        p.lipschitz_ = 0.0;
        return p;
    }

    /**
     * Values on a uniform grid over [lo, hi]^n (nodes per axis, row-major with
     * the last axis fastest), interpolated multilinearly and extended
     * constantly outside the grid.
     */
    static TerminalPayoff table(int n, double lo, double hi, int nodes, std::vector<double> values) {
        if (n < 1 || n > 2) throw std::invalid_argument("table payoff: only n <= 2");
        if (!(hi > lo) || nodes < 2) throw std::invalid_argument("table payoff: need hi > lo and >= 2 nodes");
        const std::size_t expected = n == 1 ? static_cast<std::size_t>(nodes)
                                            : static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nodes);
        if (values.size() != expected) throw std::invalid_argument("table payoff: value count mismatch");
        TerminalPayoff p(Kind::table, n);
        p.lo_ = lo;
        p.hi_ = hi;
        p.nodes_ = nodes;
        p.table_ = std::move(values);
        const double h = (hi - lo) / (nodes - 1);
        double sup = 0.0, lip = 0.0;
        for (double v : p.table_) {
            if (!std::isfinite(v)) throw std::invalid_argument("table payoff: non-finite value");
            sup = std::max(sup, std::abs(v));
        }
        auto at = [&](int i, int j) { return p.table_[static_cast<std::size_t>(i * (n == 2 ? nodes : 1) + j)]; };
        if (n == 1) {
            for (int i = 0; i + 1 < nodes; ++i) lip = std::max(lip, std::abs(p.table_[static_cast<std::size_t>(i + 1)] - p.table_[static_cast<std::size_t>(i)]) / h);
        } else {
            for (int i = 0; i < nodes; ++i)
                for (int j = 0; j < nodes; ++j) {
                    if (i + 1 < nodes) lip = std::max(lip, std::abs(at(i + 1, j) - at(i, j)) / h);
                    if (j + 1 < nodes) lip = std::max(lip, std::abs(at(i, j + 1) - at(i, j)) / h);
                }
            lip *= std::sqrt(2.0);
        }
        p.sup_ = sup;
        p.lipschitz_ = lip;
        p.center_[0] = 0.5 * (lo + hi);
        if (n == 2) p.center_[1] = 0.5 * (lo + hi);
        return p;
    }

    /// Samples fn on the table grid.
    static TerminalPayoff tabulate(int n, double lo, double hi, int nodes, const std::function<double(const Vec&)>& fn) {
        std::vector<double> v;
        const double h = (hi - lo) / (nodes - 1);
        if (n == 1) {
            for (int i = 0; i < nodes; ++i) v.push_back(fn(Vec{lo + i * h}));
        } else {
            for (int i = 0; i < nodes; ++i)
                for (int j = 0; j < nodes; ++j) v.push_back(fn(Vec{lo + i * h, lo + j * h}));
        }
        return table(n, lo, hi, nodes, std::move(v));
    }

    Kind kind() const { return kind_; }
    int n() const { return n_; }
    double sup_abs() const { return sup_; }
    double lipschitz() const { return lipschitz_; }
    const Vec& anchor() const { return center_; }
    const EventSet& event() const { return event_; }
    double width() const { return width_; }

    /// Half-extent around anchor() beyond which the payoff is negligible or constant.
    double reach() const {
        switch (kind_) {
            case Kind::gaussian_bump:
            case Kind::coordinate_bump:
                return m_ > 0.0 ? std::sqrt(2.0 * 36.9 / (m_ * beta_)) : 0.0;
            case Kind::mollified_indicator: return event_.reach(width_);
            case Kind::constant: return 0.0;
            case Kind::table: return 0.5 * (hi_ - lo_);
        }
        return 0.0;
    }

    double operator()(const Vec& x) const {
        switch (kind_) {
            case Kind::gaussian_bump: {
                double r2 = 0.0;
                for (int i = 0; i < n_; ++i) {
                    const double dx = x[static_cast<std::size_t>(i)] - center_[static_cast<std::size_t>(i)];
                    r2 += dx * dx;
                }
                return std::exp(-0.5 * m_ * beta_ * r2);
            }
            case Kind::coordinate_bump: {
                const double dx = x[static_cast<std::size_t>(coord_)] - center_[static_cast<std::size_t>(coord_)];
                return std::exp(-0.5 * m_ * beta_ * dx * dx);
            }
            case Kind::mollified_indicator: return gexpect::mollified_indicator(event_, width_, x);
            case Kind::constant: return level_;
            case Kind::table: return interpolate(x);
        }
        return 0.0;
    }

    /// Central second difference along x_1, used as a convexity indicator by feedback controls.
    double convexity_1d(double x, double h = 1e-3) const {
        return ((*this)(Vec{x + h}) - 2.0 * (*this)(Vec{x}) + (*this)(Vec{x - h})) / (h * h);
    }

private:
    TerminalPayoff(Kind kind, int n) : kind_(kind), n_(n) {
        if (n < 1 || n > kMaxDim) throw std::invalid_argument("TerminalPayoff: dimension out of range");
    }

    double interpolate(const Vec& x) const {
        const double h = (hi_ - lo_) / (nodes_ - 1);
        auto locate = [&](double v, int& i, double& w) {
            const double s = std::clamp((v - lo_) / h, 0.0, static_cast<double>(nodes_ - 1));
            i = std::min(static_cast<int>(s), nodes_ - 2);
            w = s - i;
        };
        int i = 0;
        double wx = 0.0;
        locate(x[0], i, wx);
        if (n_ == 1) {
            return (1.0 - wx) * table_[static_cast<std::size_t>(i)] + wx * table_[static_cast<std::size_t>(i + 1)];
        }
        int j = 0;
        double wy = 0.0;
        locate(x[1], j, wy);
        auto at = [&](int a, int b) { return table_[static_cast<std::size_t>(a * nodes_ + b)]; };
        return (1.0 - wx) * ((1.0 - wy) * at(i, j) + wy * at(i, j + 1)) + wx * ((1.0 - wy) * at(i + 1, j) + wy * at(i + 1, j + 1));
    }

    Kind kind_;
    int n_;
    double m_ = 0.0;
    double beta_ = 0.0;
    int coord_ = 0;
    Vec center_{};
    EventSet event_{};
    double width_ = 0.0;
    double level_ = 0.0;
    double lo_ = 0.0;
    double hi_ = 0.0;
    int nodes_ = 0;
    std::vector<double> table_;
    double sup_ = 0.0;
    double lipschitz_ = 0.0;
};

}  // namespace gexpect
