#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gexpect/linalg.hpp"
#include "gexpect/random.hpp"
#include "gexpect/sde.hpp"
#include "gexpect/sublinear.hpp"

namespace gexpect {

/**
 * Piecewise-constant covariance path gamma_t = values[k] on
 * [breakpoints[k], breakpoints[k+1]), each value inside the band.
 */
class ControlPath {
public:
    ControlPath(std::vector<double> breakpoints, std::vector<SymMatrix> values, const VolatilityBand& band)
        : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
        if (breakpoints_.size() < 2 || values_.size() + 1 != breakpoints_.size()) {
            throw std::invalid_argument("ControlPath: need K + 1 breakpoints for K values");
        }
        if (breakpoints_.front() != 0.0) throw std::invalid_argument("ControlPath: first breakpoint must be 0");
        for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
            if (!(breakpoints_[k] > breakpoints_[k - 1])) throw std::invalid_argument("ControlPath: breakpoints must increase");
        }
        const int d = values_.front().dim();
        for (const auto& g : values_) {
            if (g.dim() != d) throw std::invalid_argument("ControlPath: covariance dimensions differ");
            if (!band.admits(g)) throw std::invalid_argument("ControlPath: covariance outside the volatility band");
        }
        roots_.reserve(values_.size());
        for (const auto& g : values_) roots_.push_back(sqrt_psd(g));
    }

    static ControlPath constant(const SymMatrix& gamma, double T, const VolatilityBand& band) {
        return ControlPath({0.0, T}, {gamma}, band);
    }
    static ControlPath constant(int d, double gamma, double T, const VolatilityBand& band) {
        return constant(gamma * SymMatrix::identity(d), T, band);
    }

    /// K equal pieces on [0, T] with scalar levels times the identity.
    static ControlPath piecewise(int d, const std::vector<double>& levels, double T, const VolatilityBand& band) {
        std::vector<double> bp;
        std::vector<SymMatrix> vals;
        const auto k = levels.size();
        for (std::size_t i = 0; i <= k; ++i) bp.push_back(i == k ? T : T * static_cast<double>(i) / static_cast<double>(k));
        for (double l : levels) vals.push_back(l * SymMatrix::identity(d));
        return ControlPath(std::move(bp), std::move(vals), band);
    }

    int d() const { return values_.front().dim(); }
    double T() const { return breakpoints_.back(); }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<SymMatrix>& values() const { return values_; }
    const SymMatrix& root(std::size_t piece) const { return roots_[piece]; }

    std::size_t piece_at(double t) const {
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - breakpoints_.begin() - 1));
        return std::min(idx, values_.size() - 1);
    }
    const SymMatrix& at(double t) const { return values_[piece_at(t)]; }

    /// Sum of gamma_k times the covered length of [0, t].
    SymMatrix quadratic_variation(double t) const {
        SymMatrix qv = SymMatrix::zero(d());
        for (std::size_t k = 0; k < values_.size(); ++k) {
            const double len = std::clamp(t, breakpoints_[k], breakpoints_[k + 1]) - breakpoints_[k];
            if (len > 0.0) qv = qv + len * values_[k];
        }
        return qv;
    }

    /// Every breakpoint sits on the uniform grid with n_steps steps over [0, T].
    bool aligned(int n_steps) const {
        const double dt = T() / n_steps;
        for (double b : breakpoints_) {
            const double s = b / dt;
            if (std::abs(s - std::round(s)) > 1e-9 * std::max(1.0, s)) return false;
        }
        return true;
    }

    /// Grid step index at which each piece starts.
    std::vector<int> piece_starts(int n_steps) const {
        const double dt = T() / n_steps;
        std::vector<int> out;
        for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) out.push_back(static_cast<int>(std::lround(breakpoints_[k] / dt)));
        return out;
    }

    friend bool operator==(const ControlPath& a, const ControlPath& b) {
        return a.breakpoints_ == b.breakpoints_ && a.values_ == b.values_;
    }

private:
    std::vector<double> breakpoints_;
    std::vector<SymMatrix> values_;
    std::vector<SymMatrix> roots_;
};

/**
 * Markov bang-bang control for d = 1: gamma = sigma_high_sq where
 * indicator(t, X_t) > theta, sigma_low_sq elsewhere.
 */
struct FeedbackThreshold {
    std::function<double(double, const Vec&)> indicator;
    double theta = 0.0;
    VolatilityBand band{1.0, 1.0};
    double T = 1.0;
    std::string label = "feedback";

    double gamma(double t, const Vec& x) const { return indicator(t, x) > theta ? band.high() : band.low(); }
};

using Control = std::variant<ControlPath, FeedbackThreshold>;

inline int control_dim(const Control& c) {
    return std::holds_alternative<ControlPath>(c) ? std::get<ControlPath>(c).d() : 1;
}
inline double control_horizon(const Control& c) {
    return std::holds_alternative<ControlPath>(c) ? std::get<ControlPath>(c).T() : std::get<FeedbackThreshold>(c).T;
}

/// Short human-readable description, used in reports.
inline std::string describe(const Control& c) {
    if (const auto* f = std::get_if<FeedbackThreshold>(&c)) return f->label + "(theta=" + std::to_string(f->theta) + ")";
    const auto& p = std::get<ControlPath>(c);
    std::string s = p.values().size() == 1 ? "constant[" : "piecewise[";
    for (std::size_t k = 0; k < p.values().size(); ++k) {
        if (k) s += ",";
        const auto& g = p.values()[k];
        s += g.dim() == 1 ? std::to_string(g(0, 0)) : "trace=" + std::to_string(g.trace());
    }
    return s + "]";
}

/**
 * Resolves gamma_t and gamma_t^{1/2} per time step on a uniform grid; a
 * ControlPath that is not aligned with the grid is refused.
 */
class ControlSampler {
public:
    ControlSampler(const Control& control, int n_steps) : control_(&control), n_steps_(n_steps) {
        if (n_steps < 1) throw std::invalid_argument("ControlSampler: need at least one step");
        if (const auto* p = std::get_if<ControlPath>(&control)) {
            if (!p->aligned(n_steps)) {
                throw std::invalid_argument("control breakpoints are not aligned to the time grid");
            }
            const auto starts = p->piece_starts(n_steps);
            piece_of_step_.resize(static_cast<std::size_t>(n_steps));
            std::size_t piece = 0;
            for (int s = 0; s < n_steps; ++s) {
                while (piece + 1 < starts.size() && s >= starts[piece + 1]) ++piece;
                piece_of_step_[static_cast<std::size_t>(s)] = piece;
            }
        } else {
            const auto& f = std::get<FeedbackThreshold>(control);
            if (!f.indicator) throw std::invalid_argument("feedback control needs an indicator function");
            low_ = SymMatrix::diagonal({f.band.low()});
            high_ = SymMatrix::diagonal({f.band.high()});
            low_root_ = SymMatrix::diagonal({std::sqrt(f.band.low())});
            high_root_ = SymMatrix::diagonal({std::sqrt(f.band.high())});
        }
    }

    struct Piece {
        const SymMatrix* gamma;
        const SymMatrix* root;
    };

    Piece at(int step, double t, const Vec& x) const {
        if (const auto* p = std::get_if<ControlPath>(control_)) {
            const std::size_t k = piece_of_step_[static_cast<std::size_t>(step)];
            return {&p->values()[k], &p->root(k)};
        }
        const auto& f = std::get<FeedbackThreshold>(*control_);
        return f.indicator(t, x) > f.theta ? Piece{&high_, &high_root_} : Piece{&low_, &low_root_};
    }

private:
    const Control* control_;
    int n_steps_;
    std::vector<std::size_t> piece_of_step_;
    SymMatrix low_{1}, high_{1}, low_root_{1}, high_root_{1};
};

/**
 * One Euler step of dX = b dt + h^{jk} d<B^j, B^k> + sigma dB under gamma:
 * dB = gamma^{1/2} sqrt(dt) xi and d<B> = gamma dt.
 */
inline void euler_step(const SdeSpec& sde, double t, double dt, const SymMatrix& gamma, const SymMatrix& root,
                       const std::array<double, 4>& xi, Vec& x, Vec& dB) {
    const int n = sde.n(), d = sde.d();
    const double sq = std::sqrt(dt);
    for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int l = 0; l < d; ++l) acc += root(j, l) * xi[static_cast<std::size_t>(l)];
        dB[static_cast<std::size_t>(j)] = sq * acc;
    }
    const SmallMat s = sde.sigma(t, x);
    Vec next = x;
    const bool corr = sde.correction().kind != CorrectionField::Kind::zero;
    for (int i = 0; i < n; ++i) {
        double v = sde.b(i, t, x) * dt;
        if (corr) {
            for (int j = 0; j < d; ++j)
                for (int l = 0; l < d; ++l) v += sde.h(i, j, l, t, x) * gamma(j, l) * dt;
        }
        for (int j = 0; j < d; ++j) v += s(i, j) * dB[static_cast<std::size_t>(j)];
        next[static_cast<std::size_t>(i)] += v;
    }
    x = next;
}

/// Simulated paths with B, <B> and X on a uniform grid; row-major [path][time][component].
struct PathBundle {
    int n = 1;
    int d = 1;
    int n_paths = 0;
    int n_steps = 0;
    double T = 1.0;
    std::uint64_t seed = 0;
    std::string control;  // describe() of the control
    std::vector<double> B;   // n_paths * (n_steps + 1) * d
    std::vector<double> QV;  // n_paths * (n_steps + 1) * d * d
    std::vector<double> X;   // n_paths * (n_steps + 1) * n

    double time(int s) const { return s == n_steps ? T : T * s / n_steps; }
    std::size_t offset(int path, int step) const {
        return static_cast<std::size_t>(path) * static_cast<std::size_t>(n_steps + 1) + static_cast<std::size_t>(step);
    }
    double b(int path, int step, int j) const { return B[offset(path, step) * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)]; }
    double qv(int path, int step, int j, int k) const {
        return QV[offset(path, step) * static_cast<std::size_t>(d * d) + static_cast<std::size_t>(j * d + k)];
    }
    double x(int path, int step, int i) const { return X[offset(path, step) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)]; }
    Vec state(int path, int step) const {
        Vec v{};
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = x(path, step, i);
        return v;
    }
};

/// Stream tags keep independent phases apart for the same seed and path index.
namespace stream_tag {
inline constexpr std::uint32_t bundle = 0;
inline constexpr std::uint32_t search = 1;
inline constexpr std::uint32_t certify = 2;
inline constexpr std::uint32_t ito = 3;
}  // namespace stream_tag

/**
 * Euler paths under a fixed control. The draws for (path, step) depend only
 * on (seed, path, step), so the result is bit-identical for a given seed.
 */
inline PathBundle simulate_under_control(const SdeSpec& sde, const Control& control, const Vec& x0, int n_steps,
                                         int n_paths, std::uint64_t seed) {
    if (control_dim(control) != sde.d()) throw std::invalid_argument("simulate_under_control: control and noise dimensions differ");
    if (n_paths < 1) throw std::invalid_argument("simulate_under_control: need at least one path");
    const ControlSampler sampler(control, n_steps);
    PathBundle out;
    out.n = sde.n();
    out.d = sde.d();
    out.n_paths = n_paths;
    out.n_steps = n_steps;
    out.T = control_horizon(control);
    out.seed = seed;
    out.control = describe(control);
    const auto d = static_cast<std::size_t>(out.d), n = static_cast<std::size_t>(out.n);
    const std::size_t slots = static_cast<std::size_t>(n_paths) * static_cast<std::size_t>(n_steps + 1);
    out.B.assign(slots * d, 0.0);
    out.QV.assign(slots * d * d, 0.0);
    out.X.assign(slots * n, 0.0);
    const double dt = out.T / n_steps;
    for (int p = 0; p < n_paths; ++p) {
        const KeyedNormalStream stream(seed, stream_tag::bundle, static_cast<std::uint64_t>(p));
        Vec x = x0, bm{}, dB{};
        std::array<double, kMaxDim * kMaxDim> qv{};
        for (std::size_t i = 0; i < n; ++i) out.X[out.offset(p, 0) * n + i] = x[i];
        for (int s = 0; s < n_steps; ++s) {
            const double t = out.time(s);
            const auto piece = sampler.at(s, t, x);
            euler_step(sde, t, dt, *piece.gamma, *piece.root, stream.normals(static_cast<std::uint32_t>(s)), x, dB);
            const std::size_t o = out.offset(p, s + 1);
            for (std::size_t j = 0; j < d; ++j) {
                bm[j] += dB[j];
                out.B[o * d + j] = bm[j];
                for (std::size_t k = 0; k < d; ++k) {
                    qv[j * d + k] += (*piece.gamma)(static_cast<int>(j), static_cast<int>(k)) * dt;
                    out.QV[(o * d + j) * d + k] = qv[j * d + k];
                }
            }
            for (std::size_t i = 0; i < n; ++i) out.X[o * n + i] = x[i];
        }
    }
    return out;
}

}  // namespace gexpect
