#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gexpect/control.hpp"
#include "gexpect/events.hpp"
#include "gexpect/parallel.hpp"
#include "gexpect/payoff.hpp"

namespace gexpect {

/// Welford accumulator; merge() is the parallel combination rule.
struct RunningStats {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        ++count;
        const double delta = v - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (v - mean);
    }
    void merge(const RunningStats& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double n = static_cast<double>(count + o.count);
        const double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.count) / n;
        m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
        count += o.count;
    }
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double std_error() const { return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

/// Axis-aligned closed box, used for exit-time truncation.
struct Box {
    int n = 1;
    Vec lo{};
    Vec hi{};

    static Box cube(int n, double lo, double hi) {
        Box b;
        b.n = n;
        for (int i = 0; i < n; ++i) {
            b.lo[static_cast<std::size_t>(i)] = lo;
            b.hi[static_cast<std::size_t>(i)] = hi;
        }
        return b;
    }
    bool contains(const Vec& x) const {
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            if (x[k] < lo[k] || x[k] > hi[k]) return false;
        }
        return true;
    }
    bool interior(const Vec& x) const {
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            if (!(x[k] > lo[k] && x[k] < hi[k])) return false;
        }
        return true;
    }
};

/**
 * Path functional terminal(X_T) + sum over grid intervals of trapezoid
 * e^{-discount t} running(X_t) dt, with the running part stopped at the first
 * grid index outside exit_box when one is given.
 */
struct PathFunctional {
    std::string label;
    std::function<double(const Vec&)> terminal;
    std::optional<Integrand> running;
    double discount = 0.0;
    std::optional<Box> exit_box;

    static PathFunctional of_terminal(std::function<double(const Vec&)> fn, std::string label) {
        PathFunctional f;
        f.label = std::move(label);
        f.terminal = std::move(fn);
        return f;
    }
    static PathFunctional of_payoff(const TerminalPayoff& p, std::string label) {
        return of_terminal([p](const Vec& x) { return p(x); }, std::move(label));
    }
    static PathFunctional indicator(const EventSet& e) {
        return of_terminal([e](const Vec& x) { return e.contains(x) ? 1.0 : 0.0; }, "indicator");
    }
    static PathFunctional occupation(const Integrand& g, std::string label) {
        PathFunctional f;
        f.label = std::move(label);
        f.running = g;
        return f;
    }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    Control control = ControlPath::constant(1, 1.0, 1.0, VolatilityBand(1.0, 1.0));
    std::uint64_t seed = 0;
};

/// Pathwise value of a functional for one stream; used by all estimators.
inline double evaluate_path(const SdeSpec& sde, const ControlSampler& sampler, const PathFunctional& f, const Vec& x0,
                            double T, int n_steps, const KeyedNormalStream& stream) {
    const double dt = T / n_steps;
    Vec x = x0, dB{};
    double integral = 0.0;
    bool running = f.running.has_value();
    if (running && f.exit_box && !f.exit_box->contains(x0)) running = false;
    double prev = running ? (*f.running)(x) : 0.0;
    for (int s = 0; s < n_steps; ++s) {
        const double t = T * s / n_steps;
        const auto piece = sampler.at(s, t, x);
        euler_step(sde, t, dt, *piece.gamma, *piece.root, stream.normals(static_cast<std::uint32_t>(s)), x, dB);
        if (running) {
            const double t1 = s + 1 == n_steps ? T : T * (s + 1) / n_steps;
            const double cur = (*f.running)(x);
            if (f.discount > 0.0) {
                integral += 0.5 * dt * (std::exp(-f.discount * t) * prev + std::exp(-f.discount * t1) * cur);
            } else {
                integral += 0.5 * dt * (prev + cur);
            }
            prev = cur;
            if (f.exit_box && !f.exit_box->contains(x)) running = false;
        }
    }
    return integral + (f.terminal ? f.terminal(x) : 0.0);
}

inline constexpr int kChunkPaths = 4096;

/**
 * E_P of a functional under one control. Paths are grouped in fixed chunks
 * whose Welford states are merged in chunk order, so the estimate does not
 * depend on the worker count.
 */
inline McEstimate estimate_under_control(const SdeSpec& sde, const Control& control, const PathFunctional& f,
                                         const Vec& x0, int n_steps, std::int64_t n_paths, std::uint64_t seed,
                                         std::uint32_t tag = stream_tag::bundle, WorkerPool* pool = nullptr) {
    if (n_paths < 2) throw std::invalid_argument("estimate_under_control: need at least 2 paths");
    if (control_dim(control) != sde.d()) throw std::invalid_argument("estimate_under_control: control and noise dimensions differ");
    const ControlSampler sampler(control, n_steps);
    const double T = control_horizon(control);
    const auto chunks = static_cast<std::size_t>((n_paths + kChunkPaths - 1) / kChunkPaths);
    std::vector<RunningStats> parts(chunks);
    WorkerPool& workers = pool ? *pool : default_pool();
    workers.run(chunks, [&](std::size_t c0, std::size_t c1) {
        for (std::size_t c = c0; c < c1; ++c) {
            const auto first = static_cast<std::int64_t>(c) * kChunkPaths;
            const auto last = std::min<std::int64_t>(n_paths, first + kChunkPaths);
            for (std::int64_t p = first; p < last; ++p) {
                const KeyedNormalStream stream(seed, tag, static_cast<std::uint64_t>(p));
                parts[c].add(evaluate_path(sde, sampler, f, x0, T, n_steps, stream));
            }
        }
    });
    RunningStats total;
    for (const auto& part : parts) total.merge(part);
    McEstimate out;
    out.mean = total.mean;
    out.std_error = total.std_error();
    out.n_paths = total.count;
    out.control = control;
    out.seed = seed;
    return out;
}

/**
 * Candidate family for the sup over the representing measures.
 *
 * Search runs on common random numbers (stream tag "search"); the winner is
 * re-estimated on final_paths fresh paths (tag "certify"), and that estimate
 * is what gets reported.
 */
struct ControlSearchConfig {
    enum class Family { constant, piecewise_constant, feedback_threshold };
    Family family = Family::constant;
    int pieces = 4;          // piecewise_constant
    double theta = 0.0;      // feedback_threshold
    std::function<double(double, const Vec&)> feedback_indicator;  // defaults to payoff convexity when available
    int n_candidates = 5;
    int n_refine = 8;
    std::int64_t paths_per_candidate = 10000;
    std::int64_t final_paths = 100000;
    int n_steps = 32;
    std::uint64_t seed = 1;

    void validate() const {
        if (n_candidates < 1) throw std::invalid_argument("ControlSearchConfig: n_candidates must be >= 1");
        if (n_refine < 0) throw std::invalid_argument("ControlSearchConfig: n_refine must be >= 0");
        if (paths_per_candidate < 2 || final_paths < 2) throw std::invalid_argument("ControlSearchConfig: need >= 2 paths");
        if (n_steps < 1) throw std::invalid_argument("ControlSearchConfig: n_steps must be >= 1");
        if (family == Family::piecewise_constant && pieces < 1) throw std::invalid_argument("ControlSearchConfig: pieces >= 1");
    }
};

namespace detail {

inline std::vector<double> linspace(double a, double b, int k) {
    std::vector<double> v;
    if (k == 1) return {a, b};
    for (int i = 0; i < k; ++i) v.push_back(i + 1 == k ? b : a + (b - a) * i / (k - 1));
    return v;
}

/// gamma = Q diag(levels) Q^T, every level inside the band.
inline SymMatrix with_spectrum(const EigenDecomposition& basis, const std::vector<double>& levels) {
    const int d = static_cast<int>(levels.size());
    SymMatrix g(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) acc += basis.vectors(i, k) * levels[static_cast<std::size_t>(k)] * basis.vectors(j, k);
            g.set(i, j, acc);
        }
    return g;
}

}  // namespace detail

struct SearchTrace {
    int evaluations = 0;
    double best_search_mean = 0.0;
};

/**
 * Certified lower bound of the G-expectation of a functional: the best
 * E_P over the candidate family, re-estimated on fresh paths.
 */
inline McEstimate expectation_lower_bound(const PathFunctional& f, const SdeSpec& sde, const VolatilityBand& band,
                                          const Vec& x0, double T, const ControlSearchConfig& search,
                                          SearchTrace* trace = nullptr) {
    search.validate();
    const int d = sde.d();
    if (band.degenerate()) {
        // a single admissible measure: nothing to search
        if (trace) *trace = {};
        return estimate_under_control(sde, ControlPath::constant(d, band.low(), T, band), f, x0, search.n_steps,
                                      search.final_paths, search.seed, stream_tag::certify);
    }
    int evaluations = 0;
    auto score = [&](const Control& c) {
        ++evaluations;
        return estimate_under_control(sde, c, f, x0, search.n_steps, search.paths_per_candidate, search.seed,
                                      stream_tag::search)
            .mean;
    };
    std::optional<Control> best;
    double best_score = -std::numeric_limits<double>::infinity();
    auto consider = [&](const Control& c) {
        const double s = score(c);
        if (s > best_score) {
            best_score = s;
            best = c;
        }
        return s;
    };
    std::mt19937_64 rng(search.seed ^ 0x5bd1e995ULL);
    std::uniform_real_distribution<double> level(band.low(), band.high());

    // constant controls: scalar multiples of I, endpoints always included
    double best_level = band.high();
    {
        double top = -std::numeric_limits<double>::infinity();
        for (double c : detail::linspace(band.low(), band.high(), search.n_candidates)) {
            const double s = consider(ControlPath::constant(d, c, T, band));
            if (s > top) {
                top = s;
                best_level = c;
            }
        }
    }

    if (search.family == ControlSearchConfig::Family::constant) {
        if (d == 1) {
            // golden-section on the scalar level around the best grid candidate
            const auto grid = detail::linspace(band.low(), band.high(), std::max(2, search.n_candidates));
            const double h = grid.size() > 1 ? grid[1] - grid[0] : band.high() - band.low();
            double a = std::max(band.low(), best_level - h), b = std::min(band.high(), best_level + h);
            const double r = (std::sqrt(5.0) - 1.0) / 2.0;
            double c = b - r * (b - a), e = a + r * (b - a);
            double fc = consider(ControlPath::constant(1, c, T, band));
            double fe = consider(ControlPath::constant(1, e, T, band));
            for (int it = 0; it < search.n_refine && b - a > 1e-9; ++it) {
                if (fc >= fe) {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - r * (b - a);
                    fc = consider(ControlPath::constant(1, c, T, band));
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + r * (b - a);
                    fe = consider(ControlPath::constant(1, e, T, band));
                }
            }
        } else {
            // coordinate golden-section on the eigenvalues of random orthogonal frames
            std::normal_distribution<double> z;
            for (int cand = 0; cand < search.n_candidates; ++cand) {
                SymMatrix s(d);
                for (int i = 0; i < d; ++i)
                    for (int j = i; j < d; ++j) s.set(i, j, z(rng));
                const auto basis = jacobi_eigen(s);
                std::vector<double> levels(static_cast<std::size_t>(d));
                for (auto& l : levels) l = level(rng);
                consider(ControlPath::constant(detail::with_spectrum(basis, levels), T, band));
            }
            const auto& bestp = std::get<ControlPath>(*best);
            const auto basis = jacobi_eigen(bestp.values().front());
            std::vector<double> levels = basis.values;
            for (auto& l : levels) l = std::clamp(l, band.low(), band.high());
            for (int coord = 0; coord < d; ++coord) {
                double a = band.low(), b = band.high();
                const double r = (std::sqrt(5.0) - 1.0) / 2.0;
                auto at = [&](double v) {
                    auto lv = levels;
                    lv[static_cast<std::size_t>(coord)] = v;
                    return consider(ControlPath::constant(detail::with_spectrum(basis, lv), T, band));
                };
                double c = b - r * (b - a), e = a + r * (b - a);
                double fc = at(c), fe = at(e);
                for (int it = 0; it < search.n_refine; ++it) {
                    if (fc >= fe) {
                        b = e;
                        e = c;
                        fe = fc;
                        c = b - r * (b - a);
                        fc = at(c);
                    } else {
                        a = c;
                        c = e;
                        fc = fe;
                        e = a + r * (b - a);
                        fe = at(e);
                    }
                }
                levels[static_cast<std::size_t>(coord)] = fc >= fe ? c : e;
            }
        }
    } else if (search.family == ControlSearchConfig::Family::piecewise_constant) {
        const auto k = static_cast<std::size_t>(search.pieces);
        std::vector<double> levels(k);
        std::uniform_int_distribution<int> coin(0, 1);
        for (int cand = 0; cand < search.n_candidates; ++cand) {
            for (auto& l : levels) l = coin(rng) ? band.high() : band.low();
            consider(ControlPath::piecewise(d, levels, T, band));
            for (auto& l : levels) l = level(rng);
            consider(ControlPath::piecewise(d, levels, T, band));
        }
        // coordinate refinement over the pieces of the incumbent, endpoints first
        if (const auto* bp = std::get_if<ControlPath>(&*best); bp && bp->values().size() == k) {
            for (std::size_t i = 0; i < k; ++i) levels[i] = bp->values()[i].trace() / d;
        } else {
            std::fill(levels.begin(), levels.end(), best_level);
        }
        for (int sweep = 0; sweep < std::max(1, search.n_refine / 4); ++sweep) {
            for (std::size_t i = 0; i < k; ++i) {
                double top = -std::numeric_limits<double>::infinity();
                double pick = levels[i];
                for (double v : {band.low(), band.mid(), band.high()}) {
                    auto lv = levels;
                    lv[i] = v;
                    const double s = consider(ControlPath::piecewise(d, lv, T, band));
                    if (s > top) {
                        top = s;
                        pick = v;
                    }
                }
                levels[i] = pick;
            }
        }
    } else {
        if (d != 1) throw std::invalid_argument("feedback_threshold controls need d = 1");
        if (!search.feedback_indicator) throw std::invalid_argument("feedback_threshold needs an indicator function");
        FeedbackThreshold fb;
        fb.indicator = search.feedback_indicator;
        fb.band = band;
        fb.T = T;
        fb.theta = search.theta;
        consider(fb);
        // a few thresholds around theta, spread by the indicator scale at x0
        const double scale = std::max(1e-6, std::abs(search.feedback_indicator(0.0, x0)));
        for (int cand = 1; cand < search.n_candidates; ++cand) {
            fb.theta = search.theta + scale * (cand % 2 ? 1.0 : -1.0) * ((cand + 1) / 2) / search.n_candidates;
            consider(fb);
        }
    }

    if (trace) {
        trace->evaluations = evaluations;
        trace->best_search_mean = best_score;
    }
    return estimate_under_control(sde, *best, f, x0, search.n_steps, search.final_paths, search.seed,
                                  stream_tag::certify);
}

/// Lower bound on c(X_T in event) = sup_P P(X_T in event), using the exact indicator.
inline McEstimate capacity_lower_bound(const EventSet& event, const SdeSpec& sde, const VolatilityBand& band,
                                       const Vec& x0, double T, const ControlSearchConfig& search) {
    return expectation_lower_bound(PathFunctional::indicator(event), sde, band, x0, T, search);
}

/**
 * The two deterministic controls of the strict-inclusion example:
 * gamma* = mid (where eta = 1) and gamma_k = mid - 1/k (where eta = 0 but
 * g^k = 1). Both integrals are evaluated by a midpoint rule over the actual
 * g^k and eta along the deterministic <B>_t = gamma t.
 */
struct StrictInclusionReport {
    int k = 0;
    double T = 0.0;
    double gamma_star = 0.0;
    double gamma_k = 0.0;
    double along_star = 0.0;    // E_P*[int |g^k - eta| dt]
    double along_k = 0.0;       // E_Pk[int |g^k - eta| dt]
    double sup() const { return std::max(along_star, along_k); }
    bool demonstrates() const { return sup() >= T; }
};

/// f^i(t, x): 1 within T/i of mid t, 0 beyond 2T/i, linear between.
inline double strict_inclusion_f(int i, double t, double x, double mid, double T) {
    const double dev = std::abs(x - mid * t);
    return std::clamp((2.0 * T / i - dev) / (T / i), 0.0, 1.0);
}

inline double strict_inclusion_g(int k, double t, double x, double mid, double T) {
    double g = 1.0;
    for (int i = 1; i <= k; ++i) g = std::min(g, strict_inclusion_f(i, t, x, mid, T));
    return g;
}

inline StrictInclusionReport strict_inclusion_demo(int k, double T, const VolatilityBand& band, int quadrature = 4096) {
    if (band.degenerate()) throw std::invalid_argument("strict_inclusion_demo: needs sigma_low_sq < sigma_high_sq");
    if (k < 1) throw std::invalid_argument("strict_inclusion_demo: k must be >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("strict_inclusion_demo: T must be positive");
    const double mid = 0.5 * (band.low() + band.high());
    const double gk = mid - 1.0 / k;
    if (gk < band.low()) throw std::invalid_argument("strict_inclusion_demo: mid - 1/k leaves the band, k too small");
    StrictInclusionReport r;
    r.k = k;
    r.T = T;
    r.gamma_star = mid;
    r.gamma_k = gk;
    const ControlPath star = ControlPath::constant(1, mid, T, band);
    const ControlPath dev = ControlPath::constant(1, gk, T, band);
    const double h = T / quadrature;
    auto integral = [&](const ControlPath& c) {
        double acc = 0.0;
        for (int q = 0; q < quadrature; ++q) {
            const double t = (q + 0.5) * h;
            const double qv = c.quadratic_variation(t)(0, 0);
            const double eta = std::abs(qv - mid * t) <= 1e-12 * std::max(1.0, mid * t) ? 1.0 : 0.0;
            acc += std::abs(strict_inclusion_g(k, t, qv, mid, T) - eta) * h;
        }
        return acc;
    };
    r.along_star = integral(star);
    r.along_k = integral(dev);
    return r;
}

}  // namespace gexpect
