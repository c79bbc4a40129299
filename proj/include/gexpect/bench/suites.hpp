#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "gexpect/bench/config.hpp"
#include "gexpect/bench/report.hpp"
#include "gexpect/io.hpp"
#include "gexpect/ito.hpp"
#include "gexpect/krylov.hpp"
#include "gexpect/mc.hpp"
#include "gexpect/pde_checks.hpp"

namespace gexpect::bench {

class SuiteContext {
public:
    SuiteContext(const RunConfig& cfg, const std::string& suite, std::optional<std::filesystem::path> artifact_dir)
        : params(cfg, suite), artifact_dir_(std::move(artifact_dir)) {}

    Params params;

    /// Turns domain validation failures while reading parameters into config errors.
    template <class F>
    auto setup(F&& f) {
        try {
            return f();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(0, params.suite(), e.what());
        }
    }

    /// Runs one group of checks; an exception becomes a failed record instead of aborting the suite.
    void check(const std::string& name, const std::string& anchor, const std::function<void()>& body) {
        try {
            body();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            records.push_back(CheckRecord::error(name, anchor, e.what()));
        }
    }

    void add(CheckRecord r) { records.push_back(std::move(r)); }

    VolatilityBand band(double low = 1.0, double high = 4.0, const std::string& prefix = "") const {
        const double lo = params.number(prefix + "sigma_low_sq", low, {"band"});
        const double hi = params.number(prefix + "sigma_high_sq", high, {"band"});
        try {
            return VolatilityBand(lo, hi);
        } catch (const std::invalid_argument& e) {
            params.reject(prefix + "sigma_high_sq", e.what(), {"band"});
        }
    }

    std::uint64_t seed() const { return static_cast<std::uint64_t>(params.integer("seed", 1, {"mc", "run"})); }

    /// Writes an artifact when the run has an output directory.
    template <class Writer>
    void artifact(const std::string& stem, const std::string& ext, Writer&& write) {
        if (!artifact_dir_ || params.integer("artifacts", 1, {"run"}) == 0) return;
        std::filesystem::create_directories(*artifact_dir_);
        const auto path = fresh_path(*artifact_dir_, params.suite() + "-" + stem, ext);
        std::ofstream os(path, std::ios::binary);
        write(os);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        artifacts.push_back(path.filename().string());
    }

    std::vector<CheckRecord> records;
    std::vector<std::string> artifacts;

private:
    std::optional<std::filesystem::path> artifact_dir_;
};

using SuiteFn = void (*)(SuiteContext&);

struct SuiteInfo {
    std::string name;
    std::string anchor;
    std::string default_runtime;
    SuiteFn fn;
};

namespace detail {

inline std::string label(const std::string& what, double v) {
    std::ostringstream ss;
    ss << what << "=" << v;
    return ss.str();
}

inline std::vector<int> as_ints(const std::vector<double>& v) {
    std::vector<int> out;
    for (double x : v) out.push_back(static_cast<int>(std::lround(x)));
    return out;
}

/// Uniform in [-1, 1) from a portable 53-bit draw.
inline double uniform_pm1(std::mt19937_64& rng) { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; }

inline SymMatrix random_sym(int d, std::mt19937_64& rng, double scale) {
    SymMatrix a(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) a.set(i, j, scale * uniform_pm1(rng));
    return a;
}

inline SymMatrix random_psd(int d, std::mt19937_64& rng) {
    SmallMat s(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s(i, j) = uniform_pm1(rng);
    return outer_gram(s);
}

/// E int_0^T 1{|sigma B_t| <= eps} dt for a classical Brownian motion, by midpoint quadrature.
inline double classical_ball_occupation(double eps, double T, double sigma_sq, int nodes = 200000) {
    double q = 0.0;
    for (int k = 0; k < nodes; ++k) {
        const double t = T * (k + 0.5) / nodes;
        q += std::erf(eps / std::sqrt(2.0 * sigma_sq * t));
    }
    return q * T / nodes;
}

}  // namespace detail

inline void suite_g_core(SuiteContext& ctx) {
    const auto [band, samples, seed] = ctx.setup([&] {
        const auto n = ctx.params.integer("samples", 200);
        if (n < 1) ctx.params.reject("samples", "must be >= 1");
        return std::tuple{ctx.band(), n, ctx.seed()};
    });
    const std::string anchor = "sublinear G: monotone, sublinear, attained on the band";
    std::mt19937_64 rng(seed);
    double attain = 0.0, beat = -1e300, homog = 0.0, subadd = -1e300, structural = -1e300;
    for (std::int64_t s = 0; s < samples; ++s) {
        const int d = 1 + static_cast<int>(s % 3);
        const SymMatrix a = detail::random_sym(d, rng, 3.0);
        const SymMatrix b = detail::random_sym(d, rng, 3.0);
        const double ga = g_eval(a, band);
        const GArgmax am = g_eval_argmax(a, band);
        attain = std::max(attain, std::abs(half_trace_product(am.gamma, a) - ga));
        // random admissible gamma = Q diag(u) Q^T never beats G
        const auto frame = jacobi_eigen(detail::random_sym(d, rng, 1.0));
        std::vector<double> levels;
        for (int i = 0; i < d; ++i) levels.push_back(band.low() + (band.high() - band.low()) * 0.5 * (1.0 + detail::uniform_pm1(rng)));
        beat = std::max(beat, half_trace_product(gexpect::detail::with_spectrum(frame, levels), a) - ga);
        const double lam = 0.5 * (1.0 + detail::uniform_pm1(rng)) * 5.0;
        homog = std::max(homog, std::abs(g_eval(lam * a, band) - lam * ga));
        subadd = std::max(subadd, g_eval(a + b, band) - ga - g_eval(b, band));
        const auto sc = g_structural_check(a + detail::random_psd(d, rng), a, band);
        structural = std::max({structural, -sc.lower_slack, -sc.upper_slack, -sc.norm_slack});
    }
    ctx.add(CheckRecord::at_most("argmax attains G", anchor, attain, 0.0, 1e-10));
    ctx.add(CheckRecord::at_most("no admissible gamma exceeds G", anchor, beat, 0.0, 1e-10));
    ctx.add(CheckRecord::at_most("positive homogeneity", anchor, homog, 0.0, 1e-10));
    ctx.add(CheckRecord::at_most("subadditivity", anchor, subadd, 0.0, 1e-10));
    ctx.add(CheckRecord::at_most("trace sandwich and norm bound", anchor, structural, 0.0, 1e-10));
    ctx.check("diag(1,-1) closed form", anchor, [&] {
        const double g = g_eval(SymMatrix::diagonal({1.0, -1.0}), band);
        ctx.add(CheckRecord::at_most("diag(1,-1) closed form", anchor, std::abs(g - 0.5 * (band.high() - band.low())), 0.0, 1e-12));
    });
    ctx.check("degenerate band is linear", anchor, [&] {
        const VolatilityBand flat(band.low(), band.low());
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            const SymMatrix a = detail::random_sym(3, rng, 3.0);
            worst = std::max(worst, std::abs(g_eval(a, flat) - 0.5 * band.low() * a.trace()));
        }
        ctx.add(CheckRecord::at_most("degenerate band is linear", anchor, worst, 0.0, 1e-12));
    });
}

inline void suite_th34(SuiteContext& ctx) {
    const auto [band, T, dx, ms, n] = ctx.setup([&] {
        return std::tuple{ctx.band(), ctx.params.positive("T", 1.0), ctx.params.positive("dx", 0.01, {"grid"}),
                          ctx.params.list("m_list", {8, 32, 128}), static_cast<int>(ctx.params.integer("n", 1, {"sde"}))};
    });
    const std::string anchor = "decay of the terminal-bump G-expectation, by letting m grow";
    ctx.check("decay bound scan", anchor, [&] {
        const SdeSpec sde = SdeSpec::brownian(n);
        const Vec a{};
        const BoundScan scan = theorem34_bound_scan(sde, band, a, T, ms, dx);
        for (const auto& row : scan.rows) {
            ctx.add(CheckRecord::at_most(detail::label("max_x u(0,x) <= (1+mT)^-alpha, m", row.m), anchor, row.value, row.bound,
                                         row.tol));
        }
        ctx.artifact("u", ".gpde", [&](std::ostream& os) {
            const auto payoff = TerminalPayoff::gaussian_bump(n, ms.front(), scan.constants.beta, a);
            write_pde_binary(solve_terminal_pde(sde, band, payoff, scan.rows.front().grid), os);
        });
    });
}

inline void suite_supersolution(SuiteContext& ctx) {
    const auto [band, T, m, dx, rate, m2, dx2, half] = ctx.setup([&] {
        return std::tuple{ctx.band(),
                          ctx.params.positive("T", 1.0),
                          ctx.params.number("m", 8.0),
                          ctx.params.positive("dx", 0.01, {"grid"}),
                          ctx.params.number("drift_rate", 0.05, {"sde"}),
                          ctx.params.number("m_2d", 8.0),
                          ctx.params.positive("dx_2d", 0.1),
                          ctx.params.positive("half_width_2d", 6.0)};
    });
    const std::string full = "explicit Gaussian supersolution with drift and correction";
    const std::string coord = "coordinate supersolution for n > d";
    auto residual = [&](const std::string& name, const std::string& anchor, const SdeSpec& sde, const GridSpec& g,
                        const SupersolutionConstants& k, double mm, std::optional<int> coordinate) {
        const Vec a{};
        const ResidualCheck r = supersolution_residual(k, sde, band, a, mm, g, coordinate);
        ctx.add(CheckRecord::at_most(name, anchor, r.max_residual, 0.0, r.tol));
    };
    ctx.check("1D driftless residual", full, [&] {
        const SdeSpec sde = SdeSpec::brownian(1);
        const auto k = constants_for(sde, band, Vec{0.0}, T);
        const auto g = GridSpec::fitted(sde, band, TerminalPayoff::gaussian_bump(1, m, k.beta, Vec{0.0}), T, dx);
        residual("1D driftless residual <= tol_fd", full, sde, g, k, m, std::nullopt);
    });
    ctx.check("1D drift residual", full, [&] {
        const SdeSpec sde = SdeSpec::with_analytic_bounds(1, 1, DriftField::tanh_reversion(rate), CorrectionField::zero(),
                                                          DiffusionField::constant(SmallMat::identity(1)));
        const auto k = constants_for(sde, band, Vec{0.0}, T);
        const double mm = std::max(m, k.m_min);
        const auto g = GridSpec::fitted(sde, band, TerminalPayoff::gaussian_bump(1, mm, k.beta, Vec{0.0}), T, dx);
        residual("1D tanh-drift residual <= tol_fd", full, sde, g, k, mm, std::nullopt);
    });
    ctx.check("2D coordinate residual", coord, [&] {
        const SdeSpec sde = SdeSpec::with_analytic_bounds(2, 1, DriftField::tanh_reversion(rate), CorrectionField::zero(),
                                                          DiffusionField::constant(SmallMat::from_rows({{1.0}, {0.5}})));
        const auto k = lemma36_constants(sde.bounds(), band, T);
        const double mm = std::max(m2, k.m_min);
        const int nx = static_cast<int>(std::lround(2.0 * half / dx2)) + 1;
        const auto g = GridSpec::with_nodes(sde, band, 2, -half, half, nx, T);
        residual("2D coordinate residual <= tol_fd", coord, sde, g, k, mm, 0);
    });
}

inline void suite_capacity(SuiteContext& ctx) {
    const auto [band, t, dx, eps, shell_band, dx2, radius] = ctx.setup([&] {
        auto e = ctx.params.list("eps_list", {0.2, 0.1, 0.05});
        for (double v : e)
            if (!(v > 0.0)) ctx.params.reject("eps_list", "eps must be positive");
        return std::tuple{ctx.band(), ctx.params.positive("t", 1.0), ctx.params.positive("dx", 0.01, {"grid"}), e,
                          ctx.band(0.5, 1.0, "shell_"), ctx.params.positive("dx_2d", 0.05), ctx.params.positive("radius", 1.0)};
    });
    const auto shells = ctx.params.text("shells", "sphere, cube, curve");
    const std::string ball = "capacity of small balls decays like eps^(2 alpha)";
    ctx.check("ball capacity bound", ball, [&] {
        const SdeSpec sde = SdeSpec::brownian(1);
        const auto k = driftless_constants(sde.bounds(), band, t);
        double prev = std::numeric_limits<double>::infinity();
        bool decreasing = true;
        for (double e : eps) {
            const auto c = capacity_upper_via_pde(EventSet::ball(1, Vec{0.0}, e), e / 2.0, sde, band, t, dx, Vec{0.0});
            ctx.add(CheckRecord::at_most(detail::label("ball capacity <= e^(beta/2) eps^(2 alpha) t^-alpha, eps", e), ball, c.value,
                                         ball_capacity_bound(k, e, t), c.tol));
            decreasing = decreasing && c.value < prev;
            prev = c.value;
        }
        ctx.add(CheckRecord::holds("ball capacity strictly decreasing in eps", ball, decreasing));
    });
    const SdeSpec bm2 = SdeSpec::brownian(2);
    auto shell_scan = [&](const std::string& kind, const std::string& anchor, const std::function<EventSet(double)>& make) {
        ctx.check(kind + " shells", anchor, [&] {
            std::vector<double> values;
            for (double e : eps) {
                const auto c = capacity_upper_via_pde(make(e), e / 2.0, bm2, shell_band, t, dx2, Vec{0.0, 0.0});
                values.push_back(c.value);
                ctx.add(CheckRecord::at_most(detail::label(kind + " shell capacity, eps", e), anchor, c.value, 1.0, c.tol));
            }
            bool decreasing = true;
            for (std::size_t i = 1; i < values.size(); ++i) decreasing = decreasing && values[i] < values[i - 1];
            ctx.add(CheckRecord::holds(kind + " shell capacity decreasing in eps", anchor, decreasing));
            ctx.add(CheckRecord::at_most(kind + " shell smallest < half of largest", anchor, values.back(), 0.5 * values.front()));
        });
    };
    for (const auto& s : gexpect::bench::detail::split_list(shells)) {
        if (s == "sphere") {
            shell_scan("sphere", "spheres are polar", [&](double e) { return EventSet::sphere_shell(2, Vec{0.0, 0.0}, radius, e); });
        } else if (s == "cube") {
            shell_scan("cube", "the boundary of a cube is polar", [&](double e) {
                return EventSet::cube_boundary_shell(2, Vec{-radius, -radius}, Vec{radius, radius}, e);
            });
        } else if (s == "curve") {
            shell_scan("curve", "graphs of smooth curves are polar",
                       [&](double e) { return EventSet::curve_shell(2, 0.5, 1.0, radius, e); });
        } else {
            ctx.params.reject("shells", "unknown shell kind '" + s + "'");
        }
    }
}

inline void suite_decay(SuiteContext& ctx) {
    const auto [band, N, ts, m, dx] = ctx.setup([&] {
        return std::tuple{ctx.band(), ctx.params.positive("N", 1.0), ctx.params.list("t_list", {1, 4, 16}),
                          ctx.params.number("m", 16.0), ctx.params.positive("dx", 0.05, {"grid"})};
    });
    const std::string anchor = "long-time decay of the capacity of bounded sets";
    ctx.check("decay scan", anchor, [&] {
        const auto scan = longtime_decay_scan(SdeSpec::brownian(1), band, N, ts, m, dx);
        for (const auto& r : scan.rows)
            ctx.add(CheckRecord::at_most(detail::label("max u <= scaling envelope, t", r.t), anchor, r.value, r.envelope, r.tol));
        ctx.add(CheckRecord::holds("values decreasing in t", anchor, scan.decreasing));
    });
}

inline ControlSearchConfig search_config(SuiteContext& ctx) {
    return ctx.setup([&] {
        ControlSearchConfig c;
        c.n_candidates = static_cast<int>(ctx.params.integer("n_candidates", 5, {"mc"}));
        c.n_refine = static_cast<int>(ctx.params.integer("n_refine", 8, {"mc"}));
        c.paths_per_candidate = ctx.params.integer("paths_per_candidate", 10000, {"mc"});
        c.final_paths = ctx.params.integer("n_paths", 100000, {"mc"});
        c.n_steps = static_cast<int>(ctx.params.integer("n_steps", 32, {"mc"}));
        c.seed = ctx.seed();
        c.validate();
        return c;
    });
}

inline void suite_sandwich(SuiteContext& ctx) {
    const auto [band, T, dx] = ctx.setup(
        [&] { return std::tuple{ctx.band(), ctx.params.positive("T", 1.0), ctx.params.positive("dx", 0.01, {"grid"})}; });
    const ControlSearchConfig base = search_config(ctx);
    const std::string anchor = "G-expectation is the sup over the representing measures";
    const SdeSpec sde = SdeSpec::brownian(1);
    const Vec x0{0.0};

    struct Item {
        std::string name;
        TerminalPayoff payoff;
        ControlSearchConfig::Family family;
        std::function<double(const Vec&)> exact_terminal;  // set for the quadratic payoffs
        double exact = 0.0;
    };
    // quadratic payoffs are tabulated on the buffered box; the buffer keeps the frozen edge away from x0
    const GridSpec box = GridSpec::fitted(sde, band, TerminalPayoff::constant(1, 0.0), T, dx);
    const std::function<double(const Vec&)> square = [](const Vec& x) { return x[0] * x[0]; };
    const std::function<double(const Vec&)> neg_square = [](const Vec& x) { return -x[0] * x[0]; };
    using Family = ControlSearchConfig::Family;
    const std::vector<Item> items = {
        {"constant", TerminalPayoff::constant(1, 1.0), Family::constant, {}, 0.0},
        {"B_T^2", TerminalPayoff::tabulate(1, box.lo, box.hi, box.nx, square), Family::constant, square, band.high() * T},
        {"-B_T^2", TerminalPayoff::tabulate(1, box.lo, box.hi, box.nx, neg_square), Family::constant, neg_square, -band.low() * T},
        {"gaussian bump", TerminalPayoff::gaussian_bump(1, 4.0, 1.0, x0), Family::feedback_threshold, {}, 0.0},
        {"mollified ball", TerminalPayoff::mollified_indicator(EventSet::ball(1, x0, 0.5), 0.25), Family::feedback_threshold, {}, 0.0},
    };

    for (const auto& it : items) {
        ctx.check(it.name, anchor, [&] {
            const GridSpec g = it.exact_terminal ? box : GridSpec::fitted(sde, band, it.payoff, T, dx, x0);
            const double pde = solve_terminal_pde(sde, band, it.payoff, g).value_at(x0);
            ControlSearchConfig cfg = base;
            cfg.family = it.family;
            if (it.family == Family::feedback_threshold) {
                const TerminalPayoff p = it.payoff;
                cfg.feedback_indicator = [p](double, const Vec& x) { return p.convexity_1d(x[0]); };
            }
            const PathFunctional f = it.exact_terminal ? PathFunctional::of_terminal(it.exact_terminal, it.name)
                                                       : PathFunctional::of_payoff(it.payoff, it.name);
            const McEstimate mc = expectation_lower_bound(f, sde, band, x0, T, cfg);
            ctx.add(CheckRecord::at_most(it.name + ": MC lower <= PDE + 3 se + tol_fd", anchor, mc.mean, pde,
                                         3.0 * mc.std_error + tol_fd(g)));
            if (it.exact_terminal) {
                ctx.add(CheckRecord::at_most(it.name + ": |MC - closed form| <= 3 se", anchor, std::abs(mc.mean - it.exact), 0.0,
                                             3.0 * mc.std_error));
            }
            if (it.name == "gaussian bump") {
                ctx.artifact("bundle", ".gmcb", [&](std::ostream& os) {
                    write_bundle_binary(simulate_under_control(sde, mc.control, x0, cfg.n_steps, 64, cfg.seed), os);
                });
            }
        });
    }
}

inline void suite_krylov(SuiteContext& ctx) {
    const auto [band, T, dt, n_paths, eps, seed, gpaths] = ctx.setup([&] {
        auto e = ctx.params.list("eps_list", {0.2, 0.1, 0.05});
        if (e.size() < 3) ctx.params.reject("eps_list", "need at least three values");
        return std::tuple{ctx.band(), ctx.params.positive("T", 1.0), ctx.params.positive("dt", 1.0 / 512.0), ctx.params.integer("n_paths", 100000, {"mc"}),
                          e, ctx.seed(), ctx.params.integer("band_paths", 20000)};
    });
    const std::string anchor = "Krylov estimate: occupation of eps-balls scales like eps^(n/p)";
    const auto proc = ItoProcessSpec::brownian(1);
    const VolatilityBand classical(1.0, 1.0);
    ctx.check("classical scaling", anchor, [&] {
        const auto r = krylov_scaling_check(Vec{0.0}, 1.0, proc, classical, eps, T, dt, n_paths, seed);
        for (std::size_t i = 0; i < r.eps.size(); ++i) {
            const double q = detail::classical_ball_occupation(r.eps[i], T, 1.0);
            ctx.add(CheckRecord::at_most(detail::label("classical occupation vs quadrature, eps", r.eps[i]), anchor,
                                         std::abs(r.estimates[i].mean - q), 0.0, 4.0 * r.estimates[i].std_error));
        }
        ctx.add(CheckRecord::at_least("classical log-log slope >= n/p - 0.1", anchor, r.slope, r.required));
    });
    ctx.check("band scaling", anchor, [&] {
        const auto r = krylov_scaling_check(Vec{0.0}, 1.0, proc, band, eps, T, dt, gpaths, seed + 1);
        ctx.add(CheckRecord::at_least("band log-log slope >= n/p - 0.1", anchor, r.slope, r.required));
    });
    ctx.check("discounted constant", anchor, [&] {
        OccupationQuery q;
        q.integrand = Integrand::constant(1.0);
        q.mode = OccupationQuery::Mode::discounted;
        q.delta = 1.0;
        q.dt = dt;
        ControlSearchConfig s;
        s.n_candidates = 2;
        s.n_refine = 0;
        s.paths_per_candidate = 16;
        s.final_paths = 16;
        s.seed = seed;
        const auto est = occupation_functional(q, proc, band, s);
        const double exact = (1.0 - std::exp(-q.delta * est.horizon)) / q.delta;
        ctx.add(CheckRecord::at_most("discounted occupation of 1 equals (1 - e^(-delta H)) / delta", anchor,
                                     std::abs(est.estimate.mean - exact), 0.0, dt * dt));
    });
}

inline void suite_ito(SuiteContext& ctx) {
    const auto [band, T, n_paths, pieces, seed, lo, hi] = ctx.setup([&] {
        return std::tuple{ctx.band(), ctx.params.positive("T", 1.0), ctx.params.integer("n_paths", 1000, {"mc"}),
                          static_cast<int>(ctx.params.integer("pieces", 8)), ctx.seed(),
                          static_cast<int>(ctx.params.integer("level_min", 8)), static_cast<int>(ctx.params.integer("level_max", 12))};
    });
    const std::string anchor = "Ito-Krylov formula for W^{2,p}_loc functions, quasi-surely";
    const std::string timed = "Ito-Krylov formula with time dependence";
    std::vector<double> dts;
    for (int j = lo; j <= hi; ++j) dts.push_back(std::ldexp(T, -j));
    const auto proc = ItoProcessSpec::brownian(1);
    const ControlPath bb = bang_bang_control(1, band, T, pieces);
    using TF = SobolevTestFunction::TimeFactor;
    auto worst = [](const ResidualReport& r) { return *std::max_element(r.max_residual.begin(), r.max_residual.end()); };
    ctx.check("x|x|", anchor, [&] {
        const auto r = ito_krylov_residual(SobolevTestFunction::abs_power(), proc, band, bb, dts, n_paths, seed);
        ctx.add(CheckRecord::at_least("x|x| residual halving order >= 0.4", anchor, r.order, 0.4));
    });
    ctx.check("linear", anchor, [&] {
        const auto r = ito_krylov_residual(SobolevTestFunction::linear(Vec{2.0}, 1.0), proc, band, bb, dts, n_paths, seed);
        ctx.add(CheckRecord::at_most("linear u residual < 1e-10", anchor, worst(r), 1e-10));
    });
    ctx.check("distance squared", anchor, [&] {
        const auto r = ito_krylov_residual(SobolevTestFunction::dist_sq_to_interval(-0.25, 0.25), proc, band, bb, dts, n_paths, seed);
        ctx.add(CheckRecord::at_least("dist^2 to an interval residual order >= 0.4", anchor, r.order, 0.4));
    });
    ctx.check("t x", timed, [&] {
        const auto u = SobolevTestFunction::linear(Vec{1.0}).with_time_factor(TF::linear);
        const auto r = time_dependent_ito_residual(u, proc, band, bb, dts, n_paths, seed);
        ctx.add(CheckRecord::at_least("t x residual order >= 0.4", timed, r.order, 0.4));
    });
    ctx.check("e^-t x|x|", timed, [&] {
        const auto u = SobolevTestFunction::abs_power().with_time_factor(TF::exp_decay, 1.0);
        const auto r = time_dependent_ito_residual(u, proc, band, bb, dts, n_paths, seed);
        ctx.add(CheckRecord::at_least("e^-t x|x| residual order >= 0.4", timed, r.order, 0.4));
    });
    ctx.check("u = t", timed, [&] {
        const auto r = time_dependent_ito_residual(SobolevTestFunction::time_only(1.0), proc, band, bb, dts, std::min<std::int64_t>(n_paths, 100), seed);
        ctx.add(CheckRecord::at_most("u = t residual < 1e-10", timed, worst(r), 1e-10));
    });
}

inline void suite_domconv(SuiteContext& ctx) {
    const auto [band, T, dt, n_paths, ks, seed] = ctx.setup([&] {
        return std::tuple{ctx.band(), ctx.params.positive("T", 1.0), ctx.params.positive("dt", 1.0 / 1024.0),
                          ctx.params.integer("n_paths", 20000, {"mc"}), detail::as_ints(ctx.params.list("k_list", {2, 4, 8, 16, 32, 64})),
                          ctx.seed()};
    });
    const std::string anchor = "dominated convergence under the sublinear expectation";
    ctx.check("mollified sign family", anchor, [&] {
        std::vector<ScalarField> family;
        for (int k : ks) family.push_back(ScalarField::clamp_linear(k));
        const auto r = dominated_convergence_check(family, ScalarField::sign(), GrowthEnvelope{1.0, 0.0}, ItoProcessSpec::brownian(1),
                                                   band, 1.0, T, dt, n_paths, seed);
        ctx.add(CheckRecord::holds("error curve non-increasing within 2 se", anchor, r.non_increasing));
        ctx.add(CheckRecord::at_least("error drops >= 10x over the family", anchor, r.drop, 10.0));
    });
}

inline void suite_counterexample(SuiteContext& ctx) {
    const auto [band, T, ks] = ctx.setup([&] {
        return std::tuple{ctx.band(), ctx.params.positive("T", 1.0), detail::as_ints(ctx.params.list("k_list", {2, 10, 100}))};
    });
    const std::string anchor = "two representing controls separate M_G^1 from M_*^1";
    for (int k : ks) {
        ctx.check(detail::label("k", k), anchor, [&] {
            const auto r = strict_inclusion_demo(k, T, band);
            ctx.add(CheckRecord::at_most(detail::label("along gamma*, k", k), anchor, r.along_star, 0.0, 1e-9));
            ctx.add(CheckRecord::at_most(detail::label("|along gamma_k - T|, k", k), anchor, std::abs(r.along_k - T), 0.0, 1e-9));
            ctx.add(CheckRecord::at_least(detail::label("sup over the pair >= T, k", k), anchor, r.sup(), T, 1e-9));
        });
    }
}

inline const std::vector<SuiteInfo>& suite_registry() {
    static const std::vector<SuiteInfo> registry = {
        {"suite-g-core", "sublinear G: monotone, sublinear, attained on the band", "<1 s", suite_g_core},
        {"suite-th34", "decay of the terminal-bump G-expectation, by letting m grow", "~3 s", suite_th34},
        {"suite-supersolution", "explicit Gaussian supersolutions, with drift and coordinate forms", "~20 s", suite_supersolution},
        {"suite-capacity", "small balls, cube boundaries, spheres and curves are polar", "~3 min", suite_capacity},
        {"suite-decay", "long-time decay of the capacity of bounded sets", "~5 s", suite_decay},
        {"suite-sandwich", "G-expectation is the sup over the representing measures", "~30 s", suite_sandwich},
        {"suite-krylov", "Krylov estimate: occupation of eps-balls scales like eps^(n/p)", "~30 s", suite_krylov},
        {"suite-ito", "Ito-Krylov formula for W^{2,p}_loc functions, quasi-surely", "~5 s", suite_ito},
        {"suite-domconv", "dominated convergence under the sublinear expectation", "~10 s", suite_domconv},
        {"suite-counterexample", "two representing controls separate M_G^1 from M_*^1", "<1 s", suite_counterexample},
    };
    return registry;
}

inline const SuiteInfo* find_suite(const std::string& name) {
    for (const auto& s : suite_registry())
        if (s.name == name) return &s;
    return nullptr;
}

/// Runs one named suite; per-check failures are recorded, config errors propagate.
inline SuiteReport run_suite(const RunConfig& cfg, const std::string& suite,
                             std::optional<std::filesystem::path> artifact_dir = std::nullopt) {
    const SuiteInfo* info = find_suite(suite);
    if (!info) throw ConfigError(cfg.suites_line(), "run.suites", "unknown suite '" + suite + "'");
    const auto start = std::chrono::steady_clock::now();
    SuiteContext ctx(cfg, suite, std::move(artifact_dir));
    info->fn(ctx);
    SuiteReport r;
    r.suite = suite;
    r.config = config_echo(cfg);
    r.checks = std::move(ctx.records);
    r.artifacts = std::move(ctx.artifacts);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace gexpect::bench
