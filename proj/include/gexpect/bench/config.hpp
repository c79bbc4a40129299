#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gexpect::bench {

/// Parse or lookup failure; line is 0 when the field was not read from a file.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, std::string field, const std::string& what)
        : std::runtime_error(format(line, field, what)), line_(line), field_(std::move(field)) {}

    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    static std::string format(int line, const std::string& field, const std::string& what) {
        std::string s = "config";
        if (line > 0) s += ":" + std::to_string(line);
        if (!field.empty()) s += ": " + field;
        return s + ": " + what;
    }

    int line_;
    std::string field_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline bool valid_name(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    });
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find(',', start);
        if (end == std::string_view::npos) end = s.size();
        const auto item = trim(s.substr(start, end - start));
        if (!item.empty()) out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

}  // namespace detail

/**
 * Plain-text run configuration: [section] headers followed by key = value
 * lines. Blank lines and lines starting with # or ; are ignored.
 */
class RunConfig {
public:
    struct Entry {
        std::string key;
        std::string value;
        int line = 0;
    };
    struct Section {
        std::string name;
        std::vector<Entry> entries;
        int line = 0;
    };

    static RunConfig parse(std::string_view text) {
        RunConfig cfg;
        Section* current = nullptr;
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            const auto line = detail::trim(text.substr(pos, end - pos));
            pos = end + 1;
            ++line_no;
            if (line.empty() || line.front() == '#' || line.front() == ';') continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
                const auto name = detail::trim(line.substr(1, line.size() - 2));
                if (!detail::valid_name(name)) throw ConfigError(line_no, std::string(name), "bad section name");
                if (cfg.find_section(name)) throw ConfigError(line_no, std::string(name), "duplicate section");
                cfg.sections_.push_back({std::string(name), {}, line_no});
                current = &cfg.sections_.back();
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError(line_no, std::string(line), "expected key = value");
            const auto key = detail::trim(line.substr(0, eq));
            const auto value = detail::trim(line.substr(eq + 1));
            if (!detail::valid_name(key)) throw ConfigError(line_no, std::string(key), "bad key");
            if (!current) throw ConfigError(line_no, std::string(key), "key outside of any section");
            const std::string field = current->name + "." + std::string(key);
            for (const auto& e : current->entries)
                if (e.key == key) throw ConfigError(line_no, field, "duplicate key (first set on line " + std::to_string(e.line) + ")");
            current->entries.push_back({std::string(key), std::string(value), line_no});
        }
        return cfg;
    }

    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(0, path, "cannot open config file");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    std::string serialize() const {
        std::string out;
        for (const auto& s : sections_) {
            if (!out.empty()) out += '\n';
            out += "[" + s.name + "]\n";
            for (const auto& e : s.entries) out += e.key + " = " + e.value + "\n";
        }
        return out;
    }

    const std::vector<Section>& sections() const { return sections_; }

    const Entry* find(std::string_view section, std::string_view key) const {
        const Section* s = find_section(section);
        if (!s) return nullptr;
        for (const auto& e : s->entries)
            if (e.key == key) return &e;
        return nullptr;
    }

    bool has_section(std::string_view section) const { return find_section(section) != nullptr; }

    void set(const std::string& section, const std::string& key, const std::string& value) {
        if (!detail::valid_name(section) || !detail::valid_name(key)) throw ConfigError(0, section + "." + key, "bad name");
        if (value.find('\n') != std::string::npos) throw ConfigError(0, section + "." + key, "value spans lines");
        Section* s = find_section(section);
        if (!s) {
            sections_.push_back({section, {}, 0});
            s = &sections_.back();
        }
        for (auto& e : s->entries) {
            if (e.key == key) {
                e.value = std::string(detail::trim(value));
                return;
            }
        }
        s->entries.push_back({key, std::string(detail::trim(value)), 0});
    }

    /// Entries of [run] suites (or suite), comma separated.
    std::vector<std::string> suites() const {
        const Entry* e = find("run", "suites");
        if (!e) e = find("run", "suite");
        return e ? detail::split_list(e->value) : std::vector<std::string>{};
    }

    int suites_line() const {
        const Entry* e = find("run", "suites");
        if (!e) e = find("run", "suite");
        return e ? e->line : 0;
    }

    friend bool operator==(const RunConfig& a, const RunConfig& b) {
        if (a.sections_.size() != b.sections_.size()) return false;
        for (std::size_t i = 0; i < a.sections_.size(); ++i) {
            const auto& x = a.sections_[i];
            const auto& y = b.sections_[i];
            if (x.name != y.name || x.entries.size() != y.entries.size()) return false;
            for (std::size_t j = 0; j < x.entries.size(); ++j)
                if (x.entries[j].key != y.entries[j].key || x.entries[j].value != y.entries[j].value) return false;
        }
        return true;
    }

private:
    const Section* find_section(std::string_view name) const {
        for (const auto& s : sections_)
            if (s.name == name) return &s;
        return nullptr;
    }
    Section* find_section(std::string_view name) {
        for (auto& s : sections_)
            if (s.name == name) return &s;
        return nullptr;
    }

    std::vector<Section> sections_;
};

/// 64-bit FNV-1a, used to name run directories by config content.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

/**
 * Typed lookups for one suite. A key is looked up in the suite's own section
 * first, then in the listed fallback sections, then the default applies.
 */
class Params {
public:
    Params(const RunConfig& cfg, std::string suite) : cfg_(cfg), suite_(std::move(suite)) {}

    const std::string& suite() const { return suite_; }

    double number(const std::string& key, double fallback, std::initializer_list<const char*> sections = {}) const {
        const auto hit = lookup(key, sections);
        return hit ? to_number(*hit) : fallback;
    }

    /// A number that must be > 0 (horizons, step sizes, widths).
    double positive(const std::string& key, double fallback, std::initializer_list<const char*> sections = {}) const {
        const auto hit = lookup(key, sections);
        if (!hit) return fallback;
        const double v = to_number(*hit);
        if (!(v > 0.0)) throw ConfigError(hit->line, hit->field, "expected a positive number, got '" + hit->value + "'");
        return v;
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback, std::initializer_list<const char*> sections = {}) const {
        const auto hit = lookup(key, sections);
        if (!hit) return fallback;
        const double v = to_number(*hit);
        if (v != static_cast<double>(static_cast<std::int64_t>(v))) throw ConfigError(hit->line, hit->field, "expected an integer");
        return static_cast<std::int64_t>(v);
    }

    std::vector<double> list(const std::string& key, std::vector<double> fallback,
                             std::initializer_list<const char*> sections = {}) const {
        const auto hit = lookup(key, sections);
        if (!hit) return fallback;
        std::vector<double> out;
        for (const auto& item : detail::split_list(hit->value)) out.push_back(to_number({item, hit->line, hit->field}));
        if (out.empty()) throw ConfigError(hit->line, hit->field, "expected a non-empty list");
        return out;
    }

    std::string text(const std::string& key, std::string fallback, std::initializer_list<const char*> sections = {}) const {
        const auto hit = lookup(key, sections);
        return hit ? hit->value : fallback;
    }

    /// Wraps a domain-level validation failure with the field it came from.
    [[noreturn]] void reject(const std::string& key, const std::string& why, std::initializer_list<const char*> sections = {}) const {
        const auto hit = lookup(key, sections);
        throw ConfigError(hit ? hit->line : 0, hit ? hit->field : suite_ + "." + key, why);
    }

private:
    struct Hit {
        std::string value;
        int line;
        std::string field;
    };

    std::optional<Hit> lookup(const std::string& key, std::initializer_list<const char*> sections) const {
        if (const auto* e = cfg_.find(suite_, key)) return Hit{e->value, e->line, suite_ + "." + key};
        for (const char* s : sections)
            if (const auto* e = cfg_.find(s, key)) return Hit{e->value, e->line, std::string(s) + "." + key};
        return std::nullopt;
    }

    static double to_number(const Hit& h) {
        const std::string s(detail::trim(h.value));
        if (s.empty()) throw ConfigError(h.line, h.field, "expected a number, got an empty value");
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
            throw ConfigError(h.line, h.field, "expected a finite number, got '" + s + "'");
        }
        return v;
    }

    const RunConfig& cfg_;
    std::string suite_;
};

}  // namespace gexpect::bench
