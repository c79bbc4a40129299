#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gexpect/grid.hpp"
#include "gexpect/parallel.hpp"
#include "gexpect/payoff.hpp"
#include "gexpect/sde.hpp"
#include "gexpect/sublinear.hpp"

namespace gexpect {

/// Raised when the explicit iteration produces a non-finite value.
class PdeDivergence : public std::runtime_error {
public:
    PdeDivergence(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

/**
 * Spatial part of the G-PDE on a grid,
 *   F[u] = G(sigma^T D^2u sigma + H(Du)) + <b, Du>,  H_jk = 2 <h^{jk}, Du>,
 * with central differences inside G and the drift upwinded by sign(b_i).
 *
 * In two dimensions the mixed derivative uses the one-sided seven-point
 * stencils (positive or negative diagonal); each candidate covariance gamma*
 * is paired with the stencil matching the sign of (sigma gamma* sigma^T)_12,
 * which keeps every candidate a monotone linear operator.
 *
 * Coefficients of all built-in families are time independent, so they are
 * tabulated once per node.
 */
class DiscreteOperator {
public:
    DiscreteOperator(const SdeSpec& sde, const VolatilityBand& band, const GridSpec& grid)
        : sde_(sde), band_(band), grid_(grid), n_(grid.n), d_(sde.d()), nx_(grid.nx), dx_(grid.dx()) {
        const std::size_t nodes = grid.nodes();
        sigma_.resize(nodes);
        drift_.resize(nodes);
        corr_.resize(nodes);
        for (std::size_t k = 0; k < nodes; ++k) {
            const Vec x = position(k);
            sigma_[k] = sde.sigma(0.0, x);
            for (int i = 0; i < n_; ++i) drift_[k][static_cast<std::size_t>(i)] = sde.b(i, 0.0, x);
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < d_; ++j)
                    for (int l = 0; l < d_; ++l) corr_[k].at(i, j, l) = sde.h(i, j, l, 0.0, x);
            has_corr_ = has_corr_ || sde.correction().kind != CorrectionField::Kind::zero;
        }
    }

    const GridSpec& grid() const { return grid_; }

    Vec position(std::size_t k) const {
        if (n_ == 1) return Vec{grid_.x(static_cast<int>(k))};
        const int i = static_cast<int>(k / static_cast<std::size_t>(nx_));
        const int j = static_cast<int>(k % static_cast<std::size_t>(nx_));
        return Vec{grid_.x(i), grid_.x(j)};
    }

    bool interior(std::size_t k) const {
        if (n_ == 1) return k > 0 && k + 1 < static_cast<std::size_t>(nx_);
        const auto i = k / static_cast<std::size_t>(nx_);
        const auto j = k % static_cast<std::size_t>(nx_);
        return i > 0 && j > 0 && i + 1 < static_cast<std::size_t>(nx_) && j + 1 < static_cast<std::size_t>(nx_);
    }

    /// F[u] at interior node k.
    double apply(std::span<const double> u, std::size_t k) const {
        return n_ == 1 ? apply_1d(u, k) : apply_2d(u, k);
    }

private:
    double apply_1d(std::span<const double> u, std::size_t k) const {
        const double um = u[k - 1], u0 = u[k], up = u[k + 1];
        const double ux = (up - um) / (2.0 * dx_);
        const double uxx = (up - 2.0 * u0 + um) / (dx_ * dx_);
        const SmallMat& s = sigma_[k];
        double g;
        if (d_ == 1) {
            const double a = uxx * s(0, 0) * s(0, 0) + 2.0 * corr_[k].at(0, 0, 0) * ux;
            g = detail::g_scalar(a, band_);
        } else {
            SymMatrix a(d_);
            for (int j = 0; j < d_; ++j)
                for (int l = j; l < d_; ++l) a.set(j, l, uxx * s(0, j) * s(0, l) + 2.0 * corr_[k].at(0, j, l) * ux);
            g = g_eval(a, band_);
        }
        const double b = drift_[k][0];
        const double adv = b > 0.0 ? b * (up - u0) / dx_ : b * (u0 - um) / dx_;
        return g + adv;
    }

    double apply_2d(std::span<const double> u, std::size_t k) const {
        const std::size_t row = static_cast<std::size_t>(nx_);
        const double u0 = u[k];
        const double ue = u[k + row], uw = u[k - row];  // +/- x1
        const double un = u[k + 1], us = u[k - 1];      // +/- x2
        const double une = u[k + row + 1], usw = u[k - row - 1];
        const double use = u[k + row - 1], unw = u[k - row + 1];
        const double h2 = dx_ * dx_;
        const double ux = (ue - uw) / (2.0 * dx_);
        const double uy = (un - us) / (2.0 * dx_);
        const double uxx = (ue - 2.0 * u0 + uw) / h2;
        const double uyy = (un - 2.0 * u0 + us) / h2;
        const double cross_pos = (2.0 * u0 + une + usw - ue - uw - un - us) / (2.0 * h2);
        const double cross_neg = -(2.0 * u0 + use + unw - ue - uw - un - us) / (2.0 * h2);

        const SmallMat& s = sigma_[k];
        const CorrectionField& hc = corr_[k];
        auto h_term = [&](int j, int l) {
            return has_corr_ ? 2.0 * (hc.at(0, j, l) * ux + hc.at(1, j, l) * uy) : 0.0;
        };

        double g;
        if (d_ == 1) {
            const double s1 = s(0, 0), s2 = s(1, 0);
            const double cross = s1 * s2 >= 0.0 ? cross_pos : cross_neg;
            const double a = s1 * s1 * uxx + 2.0 * s1 * s2 * cross + s2 * s2 * uyy + h_term(0, 0);
            g = detail::g_scalar(a, band_);
        } else if (d_ == 2) {
            struct Entries {
                double a00, a01, a11;
            };
            auto assemble = [&](double cross) {
                auto entry = [&](int j, int l) {
                    return s(0, j) * s(0, l) * uxx + (s(0, j) * s(1, l) + s(1, j) * s(0, l)) * cross +
                           s(1, j) * s(1, l) * uyy + h_term(j, l);
                };
                return Entries{entry(0, 0), entry(0, 1), entry(1, 1)};
            };
            const Entries a_pos = assemble(cross_pos);
            const Entries a_neg = assemble(cross_neg);
            auto candidate = [&](const Entries& self, const Entries& other, bool self_positive) {
                const auto opt = detail::argmax2(self.a00, self.a01, self.a11, band_);
                const double a12 = s(0, 0) * (opt.g00 * s(1, 0) + opt.g01 * s(1, 1)) +
                                   s(0, 1) * (opt.g01 * s(1, 0) + opt.g11 * s(1, 1));
                if (a12 == 0.0 || (a12 > 0.0) == self_positive) return opt.value;
                return 0.5 * (opt.g00 * other.a00 + 2.0 * opt.g01 * other.a01 + opt.g11 * other.a11);
            };
            g = std::max(candidate(a_pos, a_neg, true), candidate(a_neg, a_pos, false));
        } else {
            auto assemble = [&](double cross) {
                SymMatrix a(d_);
                for (int j = 0; j < d_; ++j)
                    for (int l = j; l < d_; ++l) {
                        const double quad = s(0, j) * s(0, l) * uxx + (s(0, j) * s(1, l) + s(1, j) * s(0, l)) * cross +
                                            s(1, j) * s(1, l) * uyy;
                        a.set(j, l, quad + h_term(j, l));
                    }
                return a;
            };
            const SymMatrix a_pos = assemble(cross_pos);
            const SymMatrix a_neg = assemble(cross_neg);
            auto candidate = [&](const SymMatrix& self, const SymMatrix& other, bool self_positive) {
                const GArgmax opt = g_eval_argmax(self, band_);
                double a12 = 0.0;
                for (int j = 0; j < d_; ++j)
                    for (int l = 0; l < d_; ++l) a12 += s(0, j) * opt.gamma(j, l) * s(1, l);
                if (a12 == 0.0 || (a12 > 0.0) == self_positive) return opt.value;
                return half_trace_product(opt.gamma, other);
            };
            g = std::max(candidate(a_pos, a_neg, true), candidate(a_neg, a_pos, false));
        }
        const double b1 = drift_[k][0], b2 = drift_[k][1];
        const double adv = (b1 > 0.0 ? b1 * (ue - u0) : b1 * (u0 - uw)) / dx_ +
                           (b2 > 0.0 ? b2 * (un - u0) : b2 * (u0 - us)) / dx_;
        return g + adv;
    }

    const SdeSpec& sde_;
    VolatilityBand band_;
    GridSpec grid_;
    int n_;
    int d_;
    int nx_;
    double dx_;
    std::vector<SmallMat> sigma_;
    std::vector<Vec> drift_;
    std::vector<CorrectionField> corr_;
    bool has_corr_ = false;
};

/**
 * Grid approximation of u(t, x) for the terminal-value G-PDE.
 *
 * Time slices are stored at an even stride (at most max_snapshots of them);
 * slice 0 is t = 0 and the last slice is t = T, which equals the payoff on
 * every node.
 */
class PdeSolution {
public:
    PdeSolution(GridSpec grid, SdeSpec sde, VolatilityBand band, TerminalPayoff payoff, int stride,
                std::vector<double> values, double max_cfl_used)
        : grid_(grid), sde_(std::move(sde)), band_(band), payoff_(std::move(payoff)), stride_(stride),
          values_(std::move(values)), max_cfl_used_(max_cfl_used) {}

    const GridSpec& grid() const { return grid_; }
    const SdeSpec& sde() const { return sde_; }
    const VolatilityBand& band() const { return band_; }
    const TerminalPayoff& payoff() const { return payoff_; }
    double max_cfl_used() const { return max_cfl_used_; }

    int slices() const { return grid_.nt / stride_ + 1; }
    int slice_step(int s) const { return s * stride_; }
    double slice_time(int s) const { return s == slices() - 1 ? grid_.T : grid_.T * slice_step(s) / grid_.nt; }

    std::span<const double> slice(int s) const {
        const std::size_t nodes = grid_.nodes();
        return {values_.data() + static_cast<std::size_t>(s) * nodes, nodes};
    }
    std::span<const double> initial() const { return slice(0); }
    std::span<const double> terminal() const { return slice(slices() - 1); }
    std::span<const double> all_values() const { return values_; }

    /// max over grid nodes of u(0, x)
    double max_initial() const {
        const auto u = initial();
        return *std::max_element(u.begin(), u.end());
    }

    /// u(0, x) by linear (n = 1) or bilinear (n = 2) interpolation.
    double value_at(const Vec& x) const { return interpolate(initial(), x); }

    double interpolate(std::span<const double> u, const Vec& x) const {
        const double h = grid_.dx();
        auto locate = [&](double v, int& i, double& w) {
            if (v < grid_.lo - 1e-12 || v > grid_.hi + 1e-12) throw std::out_of_range("PdeSolution: point outside the grid box");
            const double s = std::clamp((v - grid_.lo) / h, 0.0, static_cast<double>(grid_.nx - 1));
            i = std::min(static_cast<int>(s), grid_.nx - 2);
            w = s - i;
            if (w < 1e-9) w = 0.0;
            if (w > 1.0 - 1e-9) {
                w = 0.0;
                ++i;
                if (i == grid_.nx - 1) {
                    --i;
                    w = 1.0;
                }
            }
        };
        int i = 0;
        double wx = 0.0;
        locate(x[0], i, wx);
        if (grid_.n == 1) {
            const double right = wx > 0.0 ? u[static_cast<std::size_t>(i + 1)] : 0.0;
            return (1.0 - wx) * u[static_cast<std::size_t>(i)] + wx * right;
        }
        int j = 0;
        double wy = 0.0;
        locate(x[1], j, wy);
        const auto nx = static_cast<std::size_t>(grid_.nx);
        auto at = [&](int a, int b) {
            if (a >= grid_.nx || b >= grid_.nx) return 0.0;
            return u[static_cast<std::size_t>(a) * nx + static_cast<std::size_t>(b)];
        };
        double v = (1.0 - wx) * (1.0 - wy) * at(i, j);
        if (wy > 0.0) v += (1.0 - wx) * wy * at(i, j + 1);
        if (wx > 0.0) v += wx * (1.0 - wy) * at(i + 1, j);
        if (wx > 0.0 && wy > 0.0) v += wx * wy * at(i + 1, j + 1);
        return v;
    }

private:
    GridSpec grid_;
    SdeSpec sde_;
    VolatilityBand band_;
    TerminalPayoff payoff_;
    int stride_;
    std::vector<double> values_;
    double max_cfl_used_;
};

struct SolverOptions {
    int max_snapshots = 65;
    WorkerPool* pool = nullptr;
};

/// Payoff sampled on the grid nodes.
inline std::vector<double> sample_payoff(const TerminalPayoff& payoff, const DiscreteOperator& op) {
    std::vector<double> u(op.grid().nodes());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = payoff(op.position(k));
    return u;
}

/**
 * Backward explicit time stepping from u(T, .) = Phi:
 *   u^k = u^{k+1} + dt F[u^{k+1}]
 * at interior nodes; boundary nodes keep the payoff value for all t.
 */
inline PdeSolution solve_terminal_pde(const SdeSpec& sde, const VolatilityBand& band, const TerminalPayoff& payoff,
                                      const GridSpec& grid, const SolverOptions& options = {}) {
    grid.validate(sde, band);
    if (payoff.n() != grid.n) throw std::invalid_argument("solve_terminal_pde: payoff dimension mismatch");
    WorkerPool& pool = options.pool ? *options.pool : default_pool();

    const DiscreteOperator op(sde, band, grid);
    const std::size_t nodes = grid.nodes();
    int stride = grid.nt;
    const int wanted = std::max(1, options.max_snapshots - 1);
    for (int s = 1; s <= grid.nt; ++s) {
        if (grid.nt % s == 0 && grid.nt / s <= wanted) {
            stride = s;
            break;
        }
    }
    const int slices = grid.nt / stride + 1;
    std::vector<double> store(static_cast<std::size_t>(slices) * nodes);

    std::vector<double> cur = sample_payoff(payoff, op);
    std::vector<double> next(nodes);
    std::copy(cur.begin(), cur.end(), store.begin() + static_cast<std::ptrdiff_t>((slices - 1) * nodes));
    const double dt = grid.dt();

    constexpr std::size_t kBlock = 1024;
    const std::size_t blocks = (nodes + kBlock - 1) / kBlock;
    std::vector<char> bad(blocks);
    for (int step = grid.nt - 1; step >= 0; --step) {
        pool.run(blocks, [&](std::size_t b0, std::size_t b1) {
            for (std::size_t b = b0; b < b1; ++b) {
                bool finite = true;
                const std::size_t end = std::min(nodes, (b + 1) * kBlock);
                for (std::size_t k = b * kBlock; k < end; ++k) {
                    const double v = op.interior(k) ? cur[k] + dt * op.apply(cur, k) : cur[k];
                    finite = finite && std::isfinite(v);
                    next[k] = v;
                }
                bad[b] = finite ? 0 : 1;
            }
        });
        if (std::any_of(bad.begin(), bad.end(), [](char c) { return c != 0; })) {
            throw PdeDivergence(step, "solve_terminal_pde: non-finite value at time step " + std::to_string(step));
        }
        cur.swap(next);
        if (step % stride == 0) {
            std::copy(cur.begin(), cur.end(), store.begin() + static_cast<std::ptrdiff_t>((step / stride) * nodes));
        }
    }
    return PdeSolution(grid, sde, band, payoff, stride, std::move(store), grid.cfl_ratio(sde, band));
}

}  // namespace gexpect
