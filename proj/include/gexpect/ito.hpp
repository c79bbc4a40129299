#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gexpect/krylov.hpp"

namespace gexpect {

/**
 * Test function u(t, x) = a(t) v(x) + c t for the Ito-Krylov checks.
 *
 * v has closed-form weak first and second derivatives. At kinks the
 * one-sided right limit is used, e.g. (x|x|)'' = 2 sign(x) evaluates to 2 at 0.
 */
class SobolevTestFunction {
public:
    enum class Kind { zero, linear, quadratic, abs_power, dist_sq_to_interval, piecewise_poly, custom };
    enum class TimeFactor { one, linear, exp_decay };

    using ScalarFn = std::function<double(double)>;

    /// <c, x> + c0
    static SobolevTestFunction linear(const Vec& c, double c0 = 0.0, int n = 1) {
        SobolevTestFunction u(Kind::linear, n);
        u.vec_ = c;
        u.c0_ = c0;
        return u;
    }
    /// x^T Q x
    static SobolevTestFunction quadratic(const SymMatrix& q) {
        SobolevTestFunction u(Kind::quadratic, q.dim());
        u.q_ = q;
        return u;
    }
    /// x_i |x_i|
    static SobolevTestFunction abs_power(int n = 1, int coord = 0) {
        SobolevTestFunction u(Kind::abs_power, n);
        u.coord_ = coord;
        u.growth_l_ = 1.0;
        return u;
    }
    /// dist(x_i, [a, b])^2
    static SobolevTestFunction dist_sq_to_interval(double a, double b, int n = 1, int coord = 0) {
        if (!(a <= b)) throw std::invalid_argument("dist_sq_to_interval: need a <= b");
        SobolevTestFunction u(Kind::dist_sq_to_interval, n);
        u.lo_ = a;
        u.hi_ = b;
        u.coord_ = coord;
        u.growth_l_ = 1.0;
        return u;
    }
    /**
     * Piecewise polynomial in x_i: coefficients[k] (ascending powers) on
     * [knots[k-1], knots[k]), with the first and last pieces unbounded.
     * Value and first derivative must be continuous at every knot.
     */
    static SobolevTestFunction piecewise_poly(std::vector<double> knots, std::vector<std::vector<double>> coefficients,
                                              int n = 1, int coord = 0) {
        if (coefficients.size() != knots.size() + 1) throw std::invalid_argument("piecewise_poly: need one more piece than knots");
        for (std::size_t k = 1; k < knots.size(); ++k)
            if (!(knots[k] > knots[k - 1])) throw std::invalid_argument("piecewise_poly: knots must increase");
        SobolevTestFunction u(Kind::piecewise_poly, n);
        u.knots_ = std::move(knots);
        u.coeffs_ = std::move(coefficients);
        u.coord_ = coord;
        std::size_t degree = 0;
        for (const auto& c : u.coeffs_) degree = std::max(degree, c.size());
        u.growth_l_ = degree > 1 ? static_cast<double>(degree - 2) : 0.0;
        for (std::size_t k = 0; k < u.knots_.size(); ++k) {
            const double x = u.knots_[k];
            const double scale = 1.0 + std::abs(poly_eval(u.coeffs_[k], x, 0)) + std::abs(poly_eval(u.coeffs_[k], x, 1));
            if (std::abs(poly_eval(u.coeffs_[k], x, 0) - poly_eval(u.coeffs_[k + 1], x, 0)) > 1e-9 * scale ||
                std::abs(poly_eval(u.coeffs_[k], x, 1) - poly_eval(u.coeffs_[k + 1], x, 1)) > 1e-9 * scale) {
                throw std::invalid_argument("piecewise_poly: value and first derivative must be continuous at knots");
            }
        }
        return u;
    }
    /// Closed form in x_i with user-supplied derivatives; all three are required.
    static SobolevTestFunction custom(ScalarFn v, ScalarFn dv, ScalarFn d2v, double growth_l, int n = 1, int coord = 0) {
        if (!v || !dv || !d2v) throw std::invalid_argument("SobolevTestFunction: weak derivatives must be declared");
        SobolevTestFunction u(Kind::custom, n);
        u.v_ = std::move(v);
        u.dv_ = std::move(dv);
        u.d2v_ = std::move(d2v);
        u.coord_ = coord;
        u.growth_l_ = growth_l;
        return u;
    }
    /// u(t, x) = c t
    static SobolevTestFunction time_only(double c, int n = 1) {
        SobolevTestFunction u(Kind::zero, n);
        u.time_coeff_ = c;
        return u;
    }

    /// Multiplies the spatial part by a(t) in {1, t, e^{-rate t}}.
    SobolevTestFunction with_time_factor(TimeFactor f, double rate = 0.0) const {
        SobolevTestFunction u = *this;
        u.factor_ = f;
        u.rate_ = rate;
        return u;
    }
    SobolevTestFunction plus_time(double c) const {
        SobolevTestFunction u = *this;
        u.time_coeff_ += c;
        return u;
    }

    int n() const { return n_; }
    Kind kind() const { return kind_; }
    bool time_dependent() const { return factor_ != TimeFactor::one || time_coeff_ != 0.0; }
    double growth_l() const { return growth_l_; }

    double value(double t, const Vec& x) const { return a(t) * v(x) + time_coeff_ * t; }
    double dt(double t, const Vec& x) const { return da(t) * v(x) + time_coeff_; }
    double grad(double t, const Vec& x, int i) const { return a(t) * dv(x, i); }
    double hess(double t, const Vec& x, int i, int l) const { return a(t) * d2v(x, i, l); }

private:
    SobolevTestFunction(Kind k, int n) : kind_(k), n_(n), q_(std::max(1, n)) {
        if (n < 1 || n > kMaxDim) throw std::invalid_argument("SobolevTestFunction: dimension out of range");
    }

    static double poly_eval(const std::vector<double>& c, double x, int order) {
        double acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) {
            if (k < static_cast<std::size_t>(order)) break;
            double f = 1.0;
            for (int j = 0; j < order; ++j) f *= static_cast<double>(k - static_cast<std::size_t>(j));
            acc += c[k] * f * std::pow(x, static_cast<double>(k - static_cast<std::size_t>(order)));
        }
        return acc;
    }

    std::size_t piece(double x) const {
        return static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin());
    }

    double a(double t) const {
        switch (factor_) {
            case TimeFactor::one: return 1.0;
            case TimeFactor::linear: return t;
            case TimeFactor::exp_decay: return std::exp(-rate_ * t);
        }
        return 1.0;
    }
    double da(double t) const {
        switch (factor_) {
            case TimeFactor::one: return 0.0;
            case TimeFactor::linear: return 1.0;
            case TimeFactor::exp_decay: return -rate_ * std::exp(-rate_ * t);
        }
        return 0.0;
    }

    double xi(const Vec& x) const { return x[static_cast<std::size_t>(coord_)]; }

    double v(const Vec& x) const {
        const double s = xi(x);
        switch (kind_) {
            case Kind::zero: return 0.0;
            case Kind::linear: {
                double acc = c0_;
                for (int i = 0; i < n_; ++i) acc += vec_[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
                return acc;
            }
            case Kind::quadratic: {
                double acc = 0.0;
                for (int i = 0; i < n_; ++i)
                    for (int l = 0; l < n_; ++l) acc += x[static_cast<std::size_t>(i)] * q_(i, l) * x[static_cast<std::size_t>(l)];
                return acc;
            }
            case Kind::abs_power: return s * std::abs(s);
            case Kind::dist_sq_to_interval: {
                const double dd = s < lo_ ? lo_ - s : (s > hi_ ? s - hi_ : 0.0);
                return dd * dd;
            }
            case Kind::piecewise_poly: return poly_eval(coeffs_[piece(s)], s, 0);
            case Kind::custom: return v_(s);
        }
        return 0.0;
    }

    double dv(const Vec& x, int i) const {
        if (kind_ == Kind::zero) return 0.0;
        if (kind_ == Kind::linear) return vec_[static_cast<std::size_t>(i)];
        if (kind_ == Kind::quadratic) {
            double acc = 0.0;
            for (int l = 0; l < n_; ++l) acc += 2.0 * q_(i, l) * x[static_cast<std::size_t>(l)];
            return acc;
        }
        if (i != coord_) return 0.0;
        const double s = xi(x);
        switch (kind_) {
            case Kind::abs_power: return 2.0 * std::abs(s);
            case Kind::dist_sq_to_interval: return s < lo_ ? 2.0 * (s - lo_) : (s > hi_ ? 2.0 * (s - hi_) : 0.0);
            case Kind::piecewise_poly: return poly_eval(coeffs_[piece(s)], s, 1);
            case Kind::custom: return dv_(s);
            default: return 0.0;
        }
    }

    double d2v(const Vec& x, int i, int l) const {
        if (kind_ == Kind::zero || kind_ == Kind::linear) return 0.0;
        if (kind_ == Kind::quadratic) return 2.0 * q_(i, l);
        if (i != coord_ || l != coord_) return 0.0;
        const double s = xi(x);
        switch (kind_) {
            case Kind::abs_power: return s >= 0.0 ? 2.0 : -2.0;
            case Kind::dist_sq_to_interval: return (s < lo_ || s >= hi_) ? 2.0 : 0.0;
            case Kind::piecewise_poly: return poly_eval(coeffs_[piece(s)], s, 2);
            case Kind::custom: return d2v_(s);
            default: return 0.0;
        }
    }

    Kind kind_;
    int n_;
    int coord_ = 0;
    Vec vec_{};
    double c0_ = 0.0;
    SymMatrix q_;
    double lo_ = 0.0, hi_ = 0.0;
    std::vector<double> knots_;
    std::vector<std::vector<double>> coeffs_;
    ScalarFn v_, dv_, d2v_;
    double growth_l_ = 0.0;
    TimeFactor factor_ = TimeFactor::one;
    double rate_ = 0.0;
    double time_coeff_ = 0.0;
};

struct ResidualReport {
    std::vector<double> dt;
    std::vector<double> max_residual;
    std::vector<double> mean_residual;
    double order = 0.0;  // fitted halving order of the mean residual
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<int> halving_levels(const std::vector<double>& dt_list, double T) {
    if (dt_list.size() < 2) throw std::invalid_argument("Ito residual: need at least two dt values");
    std::vector<int> steps;
    for (std::size_t i = 0; i < dt_list.size(); ++i) {
        const double s = T / dt_list[i];
        const auto r = std::lround(s);
        if (std::abs(s - static_cast<double>(r)) > 1e-9 * s || r < 1) throw std::invalid_argument("Ito residual: T / dt must be an integer");
        if (i > 0 && r != 2 * steps.back()) throw std::invalid_argument("Ito residual: dt list must decrease by halving");
        steps.push_back(static_cast<int>(r));
    }
    return steps;
}

}  // namespace detail

/**
 * |u(T, X_T) - right-hand side of the Ito-Krylov formula| per path, for each
 * dt. Brownian increments are nested: every coarse increment is the sum of
 * the finest-level increments it covers, so all levels see the same path.
 * All integrals are left-endpoint sums, with d<B> = gamma dt.
 */
inline ResidualReport time_dependent_ito_residual(const SobolevTestFunction& u, const ItoProcessSpec& proc,
                                                  const VolatilityBand& band, const ControlPath& control,
                                                  const std::vector<double>& dt_list, std::int64_t n_paths,
                                                  std::uint64_t seed) {
    if (u.n() != proc.n()) throw std::invalid_argument("Ito residual: test function dimension mismatch");
    if (control.d() != proc.d()) throw std::invalid_argument("Ito residual: control dimension mismatch");
    for (const auto& g : control.values())
        if (!band.admits(g)) throw std::invalid_argument("Ito residual: control outside the band");
    if (n_paths < 1) throw std::invalid_argument("Ito residual: need at least one path");
    const double T = control.T();
    const std::vector<int> steps = detail::halving_levels(dt_list, T);
    const int finest = steps.back();
    if (!control.aligned(steps.front())) throw std::invalid_argument("Ito residual: control not aligned to the coarsest grid");

    const int n = proc.n(), d = proc.d();
    const SdeSpec& sde = proc.sde();
    const std::size_t levels = steps.size();
    std::vector<RunningStats> mean(levels);
    std::vector<double> worst(levels, 0.0);
    const double hf = T / finest;
    std::vector<Vec> fine_dB(static_cast<std::size_t>(finest));

    for (std::int64_t p = 0; p < n_paths; ++p) {
        const KeyedNormalStream stream(seed, stream_tag::ito, static_cast<std::uint64_t>(p));
        for (int s = 0; s < finest; ++s) {
            const auto& root = control.root(control.piece_at((s + 0.5) * hf));
            const auto xi = stream.normals(static_cast<std::uint32_t>(s));
            Vec db{};
            for (int j = 0; j < d; ++j) {
                double acc = 0.0;
                for (int l = 0; l < d; ++l) acc += root(j, l) * xi[static_cast<std::size_t>(l)];
                db[static_cast<std::size_t>(j)] = std::sqrt(hf) * acc;
            }
            fine_dB[static_cast<std::size_t>(s)] = db;
        }
        for (std::size_t lv = 0; lv < levels; ++lv) {
            const int ns = steps[lv];
            const int group = finest / ns;
            const double h = T / ns;
            Vec x = proc.x0();
            double rhs = u.value(0.0, x);
            for (int k = 0; k < ns; ++k) {
                const double t = T * k / ns;
                Vec dB{};
                for (int g = 0; g < group; ++g)
                    for (int j = 0; j < d; ++j) dB[static_cast<std::size_t>(j)] += fine_dB[static_cast<std::size_t>(k * group + g)][static_cast<std::size_t>(j)];
                const SymMatrix& gamma = control.values()[control.piece_at(t + 0.5 * h)];
                const SmallMat s = sde.sigma(t, x);
                Vec drift{};
                for (int i = 0; i < n; ++i) {
                    double v = sde.b(i, t, x);
                    for (int j = 0; j < d; ++j)
                        for (int l = 0; l < d; ++l) v += sde.h(i, j, l, t, x) * gamma(j, l);
                    drift[static_cast<std::size_t>(i)] = v;
                }
                // right-hand side increments at the left endpoint
                double inc = u.dt(t, x) * h;
                for (int i = 0; i < n; ++i) {
                    const double gi = u.grad(t, x, i);
                    double noise = 0.0;
                    for (int j = 0; j < d; ++j) noise += s(i, j) * dB[static_cast<std::size_t>(j)];
                    inc += gi * (drift[static_cast<std::size_t>(i)] * h + noise);
                }
                double second = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int l = 0; l < n; ++l) {
                        const double hil = u.hess(t, x, i, l);
                        if (hil == 0.0) continue;
                        double a = 0.0;
                        for (int j = 0; j < d; ++j)
                            for (int m = 0; m < d; ++m) a += s(i, j) * gamma(j, m) * s(l, m);
                        second += hil * a;
                    }
                inc += 0.5 * second * h;
                rhs += inc;
                for (int i = 0; i < n; ++i) {
                    double noise = 0.0;
                    for (int j = 0; j < d; ++j) noise += s(i, j) * dB[static_cast<std::size_t>(j)];
                    x[static_cast<std::size_t>(i)] += drift[static_cast<std::size_t>(i)] * h + noise;
                }
            }
            const double r = std::abs(u.value(T, x) - rhs);
            mean[lv].add(r);
            worst[lv] = std::max(worst[lv], r);
        }
    }

    ResidualReport rep;
    rep.dt = dt_list;
    rep.n_paths = n_paths;
    rep.seed = seed;
    for (std::size_t lv = 0; lv < levels; ++lv) {
        rep.max_residual.push_back(worst[lv]);
        rep.mean_residual.push_back(mean[lv].mean);
    }
    bool positive = std::all_of(rep.mean_residual.begin(), rep.mean_residual.end(), [](double v) { return v > 0.0; });
    rep.order = positive ? loglog_slope(rep.dt, rep.mean_residual) : std::numeric_limits<double>::infinity();
    return rep;
}

/// Time-homogeneous test functions (no time term).
inline ResidualReport ito_krylov_residual(const SobolevTestFunction& u, const ItoProcessSpec& proc,
                                          const VolatilityBand& band, const ControlPath& control,
                                          const std::vector<double>& dt_list, std::int64_t n_paths, std::uint64_t seed) {
    if (u.time_dependent()) throw std::invalid_argument("ito_krylov_residual: use time_dependent_ito_residual for u(t, x)");
    return time_dependent_ito_residual(u, proc, band, control, dt_list, n_paths, seed);
}

/// Alternating sigma_low_sq / sigma_high_sq on `pieces` equal intervals, starting low.
inline ControlPath bang_bang_control(int d, const VolatilityBand& band, double T, int pieces) {
    std::vector<double> levels;
    for (int k = 0; k < pieces; ++k) levels.push_back(k % 2 == 0 ? band.low() : band.high());
    return ControlPath::piecewise(d, levels, T, band);
}

}  // namespace gexpect
