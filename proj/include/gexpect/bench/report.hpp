#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gexpect/bench/config.hpp"
#include "gexpect/io.hpp"

namespace gexpect::bench {

inline constexpr const char* kToolVersion = "0.1.0";

/**
 * One verified inequality. For kind "at_most" slack = measured - bound, for
 * "at_least" slack = bound - measured; either way the check passes when
 * slack <= tolerance.
 */
struct CheckRecord {
    std::string name;
    std::string anchor;
    double measured = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string kind = "at_most";
    std::string note;

    static CheckRecord at_most(std::string name, std::string anchor, double measured, double bound, double tol = 0.0) {
        CheckRecord r{std::move(name), std::move(anchor), measured, bound, measured - bound, tol, false, "at_most", {}};
        r.pass = r.slack <= tol;
        return r;
    }

    static CheckRecord at_least(std::string name, std::string anchor, double measured, double required, double tol = 0.0) {
        CheckRecord r{std::move(name), std::move(anchor), measured, required, required - measured, tol, false, "at_least", {}};
        r.pass = r.slack <= tol;
        return r;
    }

    static CheckRecord holds(std::string name, std::string anchor, bool ok, std::string note = {}) {
        CheckRecord r = at_most(std::move(name), std::move(anchor), ok ? 0.0 : 1.0, 0.0);
        r.note = std::move(note);
        return r;
    }

    /// A check whose computation threw; always a failure.
    static CheckRecord error(std::string name, std::string anchor, const std::string& what) {
        CheckRecord r = holds(std::move(name), std::move(anchor), false, "error: " + what);
        r.measured = std::nan("");
        r.slack = std::nan("");
        return r;
    }
};

struct SuiteReport {
    std::string suite;
    std::string tool_version = kToolVersion;
    nlohmann::ordered_json config;
    std::vector<CheckRecord> checks;
    double wall_time_s = 0.0;
    std::vector<std::string> artifacts;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return !checks.empty();
    }

    nlohmann::ordered_json to_json(bool with_wall_time = true) const {
        nlohmann::ordered_json j;
        j["suite"] = suite;
        j["tool_version"] = tool_version;
        j["config"] = config;
        auto& arr = j["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : checks) {
            nlohmann::ordered_json r;
            r["name"] = c.name;
            r["anchor"] = c.anchor;
            r["kind"] = c.kind;
            r["measured"] = c.measured;
            r["bound"] = c.bound;
            r["slack"] = c.slack;
            r["tolerance"] = c.tolerance;
            r["pass"] = c.pass;
            if (!c.note.empty()) r["note"] = c.note;
            arr.push_back(std::move(r));
        }
        j["artifacts"] = artifacts;
        j["pass"] = pass();
        if (with_wall_time) j["wall_time_s"] = wall_time_s;
        return j;
    }

    std::string json_text(bool with_wall_time = true) const { return to_json(with_wall_time).dump(2) + "\n"; }

    void write_csv(std::ostream& os) const {
        os << "name,kind,measured,bound,slack,tolerance,pass\n";
        for (const auto& c : checks) {
            os << '"' << c.name << "\"," << c.kind << ','
               << gexpect::detail::fmt(c.measured) << ',' << gexpect::detail::fmt(c.bound) << ','
               << gexpect::detail::fmt(c.slack) << ',' << gexpect::detail::fmt(c.tolerance) << ',' << (c.pass ? 1 : 0) << '\n';
        }
    }
};

/// Echo of the parsed config as {section: {key: value}} in file order.
inline nlohmann::ordered_json config_echo(const RunConfig& cfg) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& s : cfg.sections()) {
        nlohmann::ordered_json sec = nlohmann::ordered_json::object();
        for (const auto& e : s.entries) sec[e.key] = e.value;
        j[s.name] = std::move(sec);
    }
    return j;
}

/**
 * Picks <dir>/<stem><ext>, or <stem>.1<ext>, <stem>.2<ext>, ... so that
 * earlier reports in the run directory are never overwritten.
 */
inline std::filesystem::path fresh_path(const std::filesystem::path& dir, const std::string& stem, const std::string& ext) {
    std::filesystem::path p = dir / (stem + ext);
    for (int i = 1; std::filesystem::exists(p); ++i) p = dir / (stem + "." + std::to_string(i) + ext);
    return p;
}

/// Writes <suite>.json and <suite>.csv under dir; returns the JSON path.
inline std::filesystem::path write_report(const SuiteReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto json_path = fresh_path(dir, r.suite, ".json");
    // keep the CSV numbered like its JSON sibling
    auto csv_path = json_path;
    csv_path.replace_extension(".csv");
    {
        std::ofstream os(json_path, std::ios::binary);
        os << r.json_text();
        if (!os) throw std::runtime_error("cannot write " + json_path.string());
    }
    std::ofstream os(csv_path, std::ios::binary);
    r.write_csv(os);
    if (!os) throw std::runtime_error("cannot write " + csv_path.string());
    return json_path;
}

}  // namespace gexpect::bench
