#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gexpect/bench/suites.hpp"
#include "gexpect/io.hpp"

namespace fs = std::filesystem;
using namespace gexpect;
using namespace gexpect::bench;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int run_command(const std::string& config_path, std::optional<std::int64_t> seed, std::optional<std::string> out) {
    RunConfig cfg;
    try {
        cfg = RunConfig::load(config_path);
        if (seed) cfg.set("run", "seed", std::to_string(*seed));
        const auto suites = cfg.suites();
        if (suites.empty()) throw ConfigError(cfg.suites_line(), "run.suites", "no suites listed");
        for (const auto& s : suites)
            if (!find_suite(s)) throw ConfigError(cfg.suites_line(), "run.suites", "unknown suite '" + s + "'");
    } catch (const ConfigError& e) {
        std::cerr << "gexpect: " << e.what() << "\n";
        return kExitUsage;
    }

    const fs::path root = out ? fs::path(*out) : fs::path(cfg.find("run", "out") ? cfg.find("run", "out")->value : "out");
    const std::string text = cfg.serialize();
    const fs::path dir = root / hex64(fnv1a(text));
    fs::create_directories(dir);
    if (!fs::exists(dir / "config.ini")) std::ofstream(dir / "config.ini", std::ios::binary) << text;

    bool all_pass = true;
    for (const auto& suite : cfg.suites()) {
        SuiteReport report;
        try {
            report = run_suite(cfg, suite, dir);
        } catch (const ConfigError& e) {
            std::cerr << "gexpect: " << e.what() << "\n";
            return kExitUsage;
        }
        const fs::path json = write_report(report, dir);
        int passed = 0;
        for (const auto& c : report.checks) {
            passed += c.pass ? 1 : 0;
            if (!c.pass) std::cout << "  FAIL " << c.name << (c.note.empty() ? "" : " (" + c.note + ")") << "\n";
        }
        std::cout << (report.pass() ? "PASS " : "FAIL ") << suite << " " << passed << "/" << report.checks.size() << " checks, "
                  << report.wall_time_s << " s -> " << json.string() << "\n";
        all_pass = all_pass && report.pass();
    }
    return all_pass ? kExitPass : kExitFail;
}

int list_command(bool as_json) {
    const auto& reg = suite_registry();
    if (as_json) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& s : reg) arr.push_back({{"name", s.name}, {"anchor", s.anchor}, {"default_runtime", s.default_runtime}});
        std::cout << arr.dump(2) << "\n";
        return kExitPass;
    }
    for (const auto& s : reg) std::cout << s.name << "\t" << s.default_runtime << "\t" << s.anchor << "\n";
    return kExitPass;
}

std::string magic_of(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    char m[4] = {};
    in.read(m, 4);
    return in ? std::string(m, 4) : std::string();
}

nlohmann::ordered_json dump_json(const PdeDump& d) {
    nlohmann::ordered_json j;
    j["kind"] = "gpde";
    j["version"] = d.version;
    j["n"] = d.n;
    j["nx"] = d.nx;
    j["intervals"] = d.intervals;
    j["T"] = d.T;
    j["lo"] = d.lo;
    j["hi"] = d.hi;
    j["values"] = d.values;
    return j;
}

nlohmann::ordered_json bundle_json(const PathBundle& b) {
    nlohmann::ordered_json j;
    j["kind"] = "gmcb";
    j["n"] = b.n;
    j["d"] = b.d;
    j["n_paths"] = b.n_paths;
    j["n_steps"] = b.n_steps;
    j["T"] = b.T;
    j["seed"] = b.seed;
    j["B"] = b.B;
    j["QV"] = b.QV;
    j["X"] = b.X;
    return j;
}

int export_command(const std::string& format, const std::string& artifact, const std::optional<std::string>& output) {
    if (!fs::exists(artifact)) {
        std::cerr << "gexpect: no such artifact: " << artifact << "\n";
        return kExitUsage;
    }
    std::ofstream file;
    if (output) file.open(*output, std::ios::binary);
    std::ostream& os = output ? static_cast<std::ostream&>(file) : std::cout;
    try {
        const std::string magic = magic_of(artifact);
        std::ifstream in(artifact, std::ios::binary);
        if (magic == "GPDE") {
            const PdeDump d = read_pde_binary(in);
            if (format == "csv") write_pde_dump_csv(d, os);
            if (format == "json") os << dump_json(d).dump() << "\n";
            if (format == "bin") {
                in.clear();
                in.seekg(0);
                os << in.rdbuf();
            }
        } else if (magic == "GMCB") {
            const PathBundle b = read_bundle_binary(in);
            if (format == "csv") write_bundle_csv(b, os);
            if (format == "json") os << bundle_json(b).dump() << "\n";
            if (format == "bin") write_bundle_binary(b, os);
        } else {
            // a suite report
            const auto j = nlohmann::ordered_json::parse(in);
            if (format == "bin") {
                std::cerr << "gexpect: reports have no binary form\n";
                return kExitUsage;
            }
            if (format == "json") os << j.dump(2) << "\n";
            if (format == "csv") {
                os << "name,kind,measured,bound,slack,tolerance,pass\n";
                for (const auto& c : j.at("checks")) {
                    os << '"' << c.at("name").get<std::string>() << "\"," << c.at("kind").get<std::string>() << ','
                       << c.at("measured").dump() << ',' << c.at("bound").dump() << ','
                       << c.at("slack").dump() << ',' << c.at("tolerance").dump() << ',' << (c.at("pass").get<bool>() ? 1 : 0) << '\n';
                }
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "gexpect: cannot export " << artifact << ": " << e.what() << "\n";
        return kExitUsage;
    }
    return os ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sublinear-expectation verification suites"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run the suites listed in a config file");
    std::string config_path;
    std::optional<std::int64_t> seed;
    std::optional<std::string> out;
    run->add_option("--config", config_path, "Config file")->required();
    run->add_option("--seed", seed, "Override [run] seed");
    run->add_option("--out", out, "Output root (reports go to <out>/<config hash>/)");

    auto* list = app.add_subcommand("list-suites", "List the registered suites");
    bool as_json = false;
    list->add_flag("--json", as_json, "Machine-readable output");

    auto* exp = app.add_subcommand("export", "Convert a binary dump or report");
    std::string format, artifact;
    std::optional<std::string> output;
    exp->add_option("--format", format, "csv, json or bin")->required()->check(CLI::IsMember({"csv", "json", "bin"}));
    exp->add_option("artifact", artifact, "Path to a .gpde, .gmcb or report .json")->required();
    exp->add_option("-o,--output", output, "Write here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    if (run->parsed()) return run_command(config_path, seed, out);
    if (list->parsed()) return list_command(as_json);
    return export_command(format, artifact, output);
}
