// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gexpect/gexpect.hpp"
#include "gexpect/bench/suites.hpp"

using namespace gexpect;
using gexpect::bench::RunConfig;
using gexpect::bench::SuiteReport;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// every check of the suite must pass; the detail lists the failing names
Outcome from_suite(const SuiteReport& r) {
    std::size_t ok = 0;
    std::string failed;
    for (const auto& c : r.checks) {
        if (c.pass) {
            ++ok;
        } else {
            failed += "; failed: " + c.name + " (measured " + fmt(c.measured) + ", bound " + fmt(c.bound) + ")";
        }
    }
    return {r.pass(), std::to_string(ok) + "/" + std::to_string(r.checks.size()) + " checks" + failed};
}

Outcome run_config(const std::string& text, const std::string& suite) {
    return from_suite(bench::run_suite(RunConfig::parse(text), suite));
}

const VolatilityBand kBand(1.0, 4.0);

Outcome degenerate_exactness() {
    const VolatilityBand flat(1.0, 1.0);
    const SdeSpec sde = SdeSpec::brownian(1);
    const Vec a{};
    Outcome out{true, "|u(0,a) - (1+m)^-1/2| ="};
    for (double m : {1.0, 4.0, 16.0}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto payoff = TerminalPayoff::gaussian_bump(1, m, 1.0, a);
        const GridSpec box = GridSpec::fitted(sde, flat, payoff, 1.0, 0.01, a);
        const GridSpec g = GridSpec::with_nodes(sde, flat, 1, box.lo, box.hi, 2001, 1.0);
        const double err = std::abs(solve_terminal_pde(sde, flat, payoff, g).value_at(a) - 1.0 / std::sqrt(1.0 + m));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.pass = out.pass && err <= 1e-3 && secs < 60.0;
        out.detail += " " + fmt(err) + " (m=" + fmt(m) + ", " + fmt(secs) + " s)";
    }
    return out;
}

Outcome bump_decay_bound() {
    const auto scan = theorem34_bound_scan(SdeSpec::brownian(1), kBand, Vec{}, 1.0, {8.0, 32.0, 128.0}, 0.01);
    const bool constants = std::abs(scan.constants.alpha - 0.125) < 1e-12 && std::abs(scan.constants.beta - 0.25) < 1e-12;
    Outcome out{constants && scan.rows.size() == 3, "alpha=" + fmt(scan.constants.alpha) + " beta=" + fmt(scan.constants.beta) + ";"};
    for (const auto& r : scan.rows) {
        const bool ok = r.value <= std::pow(1.0 + r.m, -0.125) + 1e-6 + tol_fd(r.grid);
        out.pass = out.pass && ok;
        out.detail += " m=" + fmt(r.m) + ": " + fmt(r.value) + " <= " + fmt(r.bound);
    }
    return out;
}

Outcome supersolution_sign() { return run_config("[run]\nsuites = suite-supersolution\n", "suite-supersolution"); }

Outcome ball_capacity() {
    const SdeSpec sde = SdeSpec::brownian(1);
    const auto k = driftless_constants(sde.bounds(), kBand, 1.0);
    Outcome out{std::abs(k.alpha - 0.125) < 1e-12 && std::abs(k.beta - 0.25) < 1e-12, "capacity vs bound:"};
    double prev = std::numeric_limits<double>::infinity();
    for (double e : {0.2, 0.1, 0.05}) {
        const auto c = capacity_upper_via_pde(EventSet::ball(1, Vec{}, e), e / 2.0, sde, kBand, 1.0, 0.01, Vec{});
        const double bound = std::exp(k.beta / 2.0) * std::pow(e, 2.0 * k.alpha);
        out.pass = out.pass && c.value <= bound + c.tol && c.value < prev;
        prev = c.value;
        out.detail += " eps=" + fmt(e) + ": " + fmt(c.value) + " <= " + fmt(bound);
    }
    return out;
}

Outcome sandwich() { return run_config("[run]\nsuites = suite-sandwich\n[mc]\nn_paths = 100000\n", "suite-sandwich"); }

Outcome polar_shells() {
    return run_config("[run]\nsuites = suite-capacity\n[suite-capacity]\nshells = sphere, cube\nradius = 1\nt = 1\n",
                      "suite-capacity");
}

Outcome krylov_scaling() {
    const auto r = krylov_scaling_check(Vec{}, 1.0, ItoProcessSpec::brownian(1), VolatilityBand(1.0, 1.0), {0.2, 0.1, 0.05}, 1.0,
                                        1.0 / 512.0, 100000, 11);
    const double q = bench::detail::classical_ball_occupation(0.1, 1.0, 1.0);
    const auto& est = r.estimates[1];
    const bool oracle = std::abs(est.mean - q) <= 4.0 * est.std_error;
    return {oracle && r.slope >= 0.9,
            "eps=0.1: " + fmt(est.mean) + " vs quadrature " + fmt(q) + " (se " + fmt(est.std_error) + "); slope " + fmt(r.slope)};
}

Outcome ito_residual() {
    std::vector<double> dts;
    for (int j = 8; j <= 12; ++j) dts.push_back(std::ldexp(1.0, -j));
    const auto proc = ItoProcessSpec::brownian(1);
    const auto bb = bang_bang_control(1, kBand, 1.0, 8);
    const auto r = ito_krylov_residual(SobolevTestFunction::abs_power(), proc, kBand, bb, dts, 1000, 21);
    const auto lin = ito_krylov_residual(SobolevTestFunction::linear(Vec{2.0}, 1.0), proc, kBand, bb, dts, 1000, 21);
    double worst = 0.0;
    for (double v : lin.max_residual) worst = std::max(worst, v);
    return {r.order >= 0.4 && worst < 1e-10, "x|x| order " + fmt(r.order) + "; linear residual " + fmt(worst)};
}

Outcome strict_inclusion() {
    Outcome out{true, "sup over the pair:"};
    std::string pair;
    for (int k : {2, 10, 100}) {
        const auto r = strict_inclusion_demo(k, 1.0, kBand);
        out.pass = out.pass && r.sup() >= 1.0 - 1e-9;
        if (k == 10) {
            out.pass = out.pass && std::abs(r.along_star) <= 1e-9 && std::abs(r.along_k - 1.0) <= 1e-9;
            pair = "; k=10 pair (" + fmt(r.along_star) + ", " + fmt(r.along_k) + ")";
        }
        out.detail += " k=" + std::to_string(k) + ": " + fmt(r.sup());
    }
    out.detail += pair;
    return out;
}

Outcome dominated_convergence() {
    std::vector<ScalarField> family;
    for (int k : {2, 4, 8, 16, 32, 64}) family.push_back(ScalarField::clamp_linear(k));
    const auto r = dominated_convergence_check(family, ScalarField::sign(), GrowthEnvelope{1.0, 0.0}, ItoProcessSpec::brownian(1),
                                               kBand, 1.0, 1.0, 1.0 / 1024.0, 20000, 31);
    return {r.non_increasing && r.drop >= 10.0,
            std::string("non-increasing ") + (r.non_increasing ? "yes" : "no") + "; drop " + fmt(r.drop) + "x"};
}

Outcome determinism() {
    const std::string text =
        "[run]\nsuites = suite-g-core, suite-th34, suite-ito, suite-counterexample\nseed = 9\n[mc]\nn_paths = 300\n";
    const RunConfig cfg = RunConfig::parse(text);
    Outcome out{true, "same config twice:"};
    for (const auto& s : cfg.suites()) {
        const std::string a = bench::run_suite(cfg, s).json_text(false);
        const std::string b = bench::run_suite(RunConfig::parse(text), s).json_text(false);
        out.pass = out.pass && a == b;
        out.detail += " " + s + (a == b ? " identical" : " DIFFERS");
    }
    return out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"AC1 degenerate-band exactness", degenerate_exactness},
        {"AC2 terminal-bump decay bound", bump_decay_bound},
        {"AC3 supersolution residual sign", supersolution_sign},
        {"AC4 small-ball capacity bound", ball_capacity},
        {"AC5 MC/PDE sandwich", sandwich},
        {"AC6 polar shells", polar_shells},
        {"AC7 Krylov occupation scaling", krylov_scaling},
        {"AC8 Ito-Krylov residual order", ito_residual},
        {"AC9 strict inclusion", strict_inclusion},
        {"AC10 dominated convergence", dominated_convergence},
        {"AC11 report determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
