#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gexpect/mc.hpp"

namespace gexpect {

/**
 * G-Ito process dX = alpha ds + beta^{jk} d<B^j, B^k> + sigma dB started at
 * x0, carried by the SdeSpec coefficient families.
 *
 * On construction |alpha|, |beta^{jk}| <= L and
 * lambda_bar I <= sigma sigma^T <= Lambda_bar I are spot-checked at 10^4
 * random points; n <= d is required.
 */
class ItoProcessSpec {
public:
    ItoProcessSpec(SdeSpec sde, const Vec& x0, std::uint64_t check_seed = 20240602) : sde_(std::move(sde)), x0_(x0) {
        if (sde_.n() > sde_.d()) throw std::invalid_argument("ItoProcessSpec: requires n <= d");
        std::mt19937_64 rng(check_seed);
        std::uniform_real_distribution<double> xs(-10.0, 10.0), ts(0.0, 10.0);
        const auto& b = sde_.bounds();
        const double rel = 1e-9;
        for (int s = 0; s < SdeSpec::kSpotChecks; ++s) {
            Vec x{};
            for (int i = 0; i < sde_.n(); ++i) x[static_cast<std::size_t>(i)] = xs(rng);
            const double t = ts(rng);
            const auto e = jacobi_eigen(outer_gram(sde_.sigma(t, x)));
            if (e.values.front() < b.lambda_bar * (1.0 - rel) || e.values.back() > b.Lambda_bar * (1.0 + rel)) {
                throw std::invalid_argument("ItoProcessSpec: declared lambda_bar / Lambda_bar violated at a sampled point");
            }
        }
    }

    /// Driftless G-Brownian motion in R^d started at x0.
    static ItoProcessSpec brownian(int d, const Vec& x0 = {}) { return ItoProcessSpec(SdeSpec::brownian(d), x0); }

    const SdeSpec& sde() const { return sde_; }
    const Vec& x0() const { return x0_; }
    int n() const { return sde_.n(); }
    int d() const { return sde_.d(); }

private:
    SdeSpec sde_;
    Vec x0_;
};

/**
 * Occupation functional E^[int w(t) |g(X_t)|^p-type integrand dt] in one of
 * three modes; the integrand already carries its power.
 */
struct OccupationQuery {
    enum class Mode { exit_truncated, discounted, finite_horizon };
    Integrand integrand = Integrand::constant(0.0);
    Mode mode = Mode::finite_horizon;
    double T = 1.0;          // horizon, also the cap for exit mode
    double delta = 1.0;      // discount rate
    Box region = Box::cube(1, -1.0, 1.0);
    double p = 1.0;
    double dt = 1.0 / 512.0;

    static constexpr double kDiscountCutoff = 1e-8;

    /// Horizon at which e^{-delta t} drops below 1e-8.
    double discount_horizon() const { return std::log(1.0 / kDiscountCutoff) / delta; }

    double horizon() const { return mode == Mode::discounted ? discount_horizon() : T; }
    int steps() const { return std::max(1, static_cast<int>(std::ceil(horizon() / dt - 1e-9))); }
    /// Horizon actually simulated: steps() * dt.
    double simulated_horizon() const { return steps() * dt; }

    void validate(int n) const {
        if (!(dt > 0.0)) throw std::invalid_argument("OccupationQuery: dt must be positive");
        if (mode == Mode::discounted && !(delta > 0.0)) throw std::invalid_argument("OccupationQuery: discount rate must be positive");
        if (mode != Mode::discounted && !(T > 0.0)) throw std::invalid_argument("OccupationQuery: horizon must be positive");
        if (p < n) throw std::invalid_argument("OccupationQuery: need p >= n");
        if (mode == Mode::exit_truncated) {
            if (region.n != n) throw std::invalid_argument("OccupationQuery: region dimension mismatch");
            for (int i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>(i);
                if (!(region.lo[k] < region.hi[k]) || !std::isfinite(region.lo[k]) || !std::isfinite(region.hi[k])) {
                    throw std::invalid_argument("OccupationQuery: exit region must be a bounded box");
                }
            }
        }
    }

    PathFunctional functional() const {
        PathFunctional f = PathFunctional::occupation(integrand, "occupation");
        if (mode == Mode::discounted) f.discount = delta;
        if (mode == Mode::exit_truncated) f.exit_box = region;
        return f;
    }
};

struct OccupationEstimate {
    McEstimate estimate;
    bool outside_region = false;  // exit mode with x0 not interior to D
    double horizon = 0.0;
};

/// Sup over the searched controls of the pathwise trapezoid occupation integral.
inline OccupationEstimate occupation_functional(const OccupationQuery& query, const ItoProcessSpec& proc,
                                                const VolatilityBand& band, ControlSearchConfig search) {
    query.validate(proc.n());
    OccupationEstimate out;
    out.horizon = query.simulated_horizon();
    if (query.mode == OccupationQuery::Mode::exit_truncated && !query.region.interior(proc.x0())) {
        out.outside_region = true;
        out.estimate.control = ControlPath::constant(proc.d(), band.low(), out.horizon, band);
        out.estimate.n_paths = 0;
        return out;
    }
    search.n_steps = query.steps();
    out.estimate = expectation_lower_bound(query.functional(), proc.sde(), band, proc.x0(), out.horizon, search);
    return out;
}

/// First grid index with the path strictly outside the closed box; the last index if it never leaves.
inline std::size_t exit_time(const std::vector<Vec>& path, const Box& region) {
    if (path.empty()) throw std::invalid_argument("exit_time: empty path");
    for (std::size_t i = 0; i < path.size(); ++i)
        if (!region.contains(path[i])) return i;
    return path.size() - 1;
}

/// The constant controls sigma_low_sq, mid and sigma_high_sq (one control when the band is degenerate).
inline std::vector<ControlPath> standard_battery(int d, const VolatilityBand& band, double T) {
    if (band.degenerate()) return {ControlPath::constant(d, band.low(), T, band)};
    return {ControlPath::constant(d, band.low(), T, band), ControlPath::constant(d, band.mid(), T, band),
            ControlPath::constant(d, band.high(), T, band)};
}

/**
 * Several finite-horizon occupation integrals on the same paths, maximised
 * over the standard control battery. Sharing paths makes comparisons across
 * the family (monotonicity in eps, convergence in k) free of sampling noise
 * between members.
 */
inline std::vector<McEstimate> battery_occupation(const std::vector<Integrand>& family, const ItoProcessSpec& proc,
                                                  const VolatilityBand& band, double T, double dt, std::int64_t n_paths,
                                                  std::uint64_t seed, WorkerPool* pool = nullptr) {
    if (family.empty()) return {};
    if (n_paths < 2) throw std::invalid_argument("battery_occupation: need at least 2 paths");
    const int n_steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    const double h = T / n_steps;
    const std::size_t m = family.size();
    std::vector<McEstimate> best(m);
    std::vector<bool> have(m, false);
    WorkerPool& workers = pool ? *pool : default_pool();
    for (const ControlPath& c : standard_battery(proc.d(), band, T)) {
        const Control control = c;
        const ControlSampler sampler(control, n_steps);
        const auto chunks = static_cast<std::size_t>((n_paths + kChunkPaths - 1) / kChunkPaths);
        std::vector<std::vector<RunningStats>> parts(chunks, std::vector<RunningStats>(m));
        workers.run(chunks, [&](std::size_t c0, std::size_t c1) {
            std::vector<double> acc(m), prev(m);
            for (std::size_t ch = c0; ch < c1; ++ch) {
                const auto first = static_cast<std::int64_t>(ch) * kChunkPaths;
                const auto last = std::min<std::int64_t>(n_paths, first + kChunkPaths);
                for (std::int64_t p = first; p < last; ++p) {
                    const KeyedNormalStream stream(seed, stream_tag::bundle, static_cast<std::uint64_t>(p));
                    Vec x = proc.x0(), dB{};
                    for (std::size_t j = 0; j < m; ++j) {
                        acc[j] = 0.0;
                        prev[j] = family[j](x);
                    }
                    for (int s = 0; s < n_steps; ++s) {
                        const double t = T * s / n_steps;
                        const auto piece = sampler.at(s, t, x);
                        euler_step(proc.sde(), t, h, *piece.gamma, *piece.root, stream.normals(static_cast<std::uint32_t>(s)), x, dB);
                        for (std::size_t j = 0; j < m; ++j) {
                            const double cur = family[j](x);
                            acc[j] += 0.5 * h * (prev[j] + cur);
                            prev[j] = cur;
                        }
                    }
                    for (std::size_t j = 0; j < m; ++j) parts[ch][j].add(acc[j]);
                }
            }
        });
        for (std::size_t j = 0; j < m; ++j) {
            RunningStats total;
            for (const auto& part : parts) total.merge(part[j]);
            if (!have[j] || total.mean > best[j].mean) {
                have[j] = true;
                best[j].mean = total.mean;
                best[j].std_error = total.std_error();
                best[j].n_paths = total.count;
                best[j].control = control;
                best[j].seed = seed;
            }
        }
    }
    return best;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need matching lists of length >= 2");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double k = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_slope: values must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

struct ScalingReport {
    std::vector<double> eps;
    std::vector<McEstimate> estimates;
    double slope = 0.0;
    double required = 0.0;  // n / p - 0.1
    bool pass = false;
};

/**
 * Occupation of the eps-balls around `center` for each eps, and the fitted
 * log-log slope, which must not fall below n/p - 0.1.
 */
inline ScalingReport krylov_scaling_check(const Vec& center, double p, const ItoProcessSpec& proc,
                                          const VolatilityBand& band, const std::vector<double>& eps_list, double T,
                                          double dt, std::int64_t n_paths, std::uint64_t seed) {
    if (eps_list.size() < 3) throw std::invalid_argument("krylov_scaling_check: need at least 3 eps values");
    if (p < proc.n()) throw std::invalid_argument("krylov_scaling_check: need p >= n");
    const double ratio = eps_list[1] / eps_list[0];
    for (std::size_t i = 1; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0) || std::abs(eps_list[i] / eps_list[i - 1] - ratio) > 1e-9 * std::abs(ratio)) {
            throw std::invalid_argument("krylov_scaling_check: eps_list must be geometric");
        }
    }
    std::vector<Integrand> family;
    for (double e : eps_list) family.push_back(Integrand::indicator(EventSet::ball(proc.n(), center, e)));
    ScalingReport r;
    r.eps = eps_list;
    r.estimates = battery_occupation(family, proc, band, T, dt, n_paths, seed);
    std::vector<double> means;
    for (const auto& e : r.estimates) means.push_back(e.mean);
    r.slope = loglog_slope(eps_list, means);
    r.required = proc.n() / p - 0.1;
    r.pass = r.slope >= r.required;
    return r;
}

/// Declared polynomial envelope C (1 + |x|^l) shared by a dominated family.
struct GrowthEnvelope {
    double C = 1.0;
    double l = 0.0;
    bool covers(const ScalarField& f) const { return f.growth_c() <= C && f.growth_l() <= l; }
};

struct DomConvReport {
    std::vector<McEstimate> errors;
    bool non_increasing = false;
    double drop = 0.0;  // first / last
    bool pass = false;
};

/**
 * Error curve k -> sup over the standard battery of
 * E_P[int_0^T |phi^k(X_t) - phi(X_t)|^p dt].
 */
inline DomConvReport dominated_convergence_check(const std::vector<ScalarField>& family, const ScalarField& limit,
                                                 const GrowthEnvelope& envelope, const ItoProcessSpec& proc,
                                                 const VolatilityBand& band, double p, double T, double dt,
                                                 std::int64_t n_paths, std::uint64_t seed) {
    if (family.size() < 2) throw std::invalid_argument("dominated_convergence_check: need at least two members");
    if (!envelope.covers(limit)) throw std::invalid_argument("dominated_convergence_check: limit outside the declared envelope");
    for (const auto& f : family)
        if (!envelope.covers(f)) throw std::invalid_argument("dominated_convergence_check: member outside the declared envelope");
    std::vector<Integrand> errs;
    for (const auto& f : family) errs.push_back(Integrand::power_difference(f, limit, p));
    DomConvReport r;
    r.errors = battery_occupation(errs, proc, band, T, dt, n_paths, seed);
    r.non_increasing = true;
    for (std::size_t i = 1; i < r.errors.size(); ++i) {
        const auto& a = r.errors[i - 1];
        const auto& b = r.errors[i];
        const double slack = 2.0 * std::hypot(a.std_error, b.std_error);
        if (b.mean > a.mean + slack) r.non_increasing = false;
    }
    const double first = r.errors.front().mean, last = r.errors.back().mean;
    r.drop = last > 0.0 ? first / last : std::numeric_limits<double>::infinity();
    r.pass = r.non_increasing && last < first / 10.0;
    return r;
}

}  // namespace gexpect
