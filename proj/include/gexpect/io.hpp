#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gexpect/control.hpp"
#include "gexpect/pde.hpp"

namespace gexpect {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

namespace detail {

template <class T>
void put(std::ostream& os, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is) {
    char buf[sizeof(T)];
    if (!is.read(buf, sizeof(T))) throw std::runtime_error("binary dump truncated");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

inline void put_magic(std::ostream& os, const char* magic) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char* magic) {
    char m[4];
    if (!is.read(m, 4) || std::memcmp(m, magic, 4) != 0) {
        throw std::runtime_error(std::string("not a ") + magic + " file");
    }
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline constexpr std::uint16_t kDumpVersion = 1;

/// CSV with header t,x1[,x2],u over every stored slice.
inline void write_pde_csv(const PdeSolution& sol, std::ostream& os) {
    const auto& g = sol.grid();
    os << (g.n == 1 ? "t,x1,u\n" : "t,x1,x2,u\n");
    for (int s = 0; s < sol.slices(); ++s) {
        const auto u = sol.slice(s);
        const std::string t = detail::fmt(sol.slice_time(s));
        for (int i = 0; i < g.nx; ++i) {
            if (g.n == 1) {
                os << t << ',' << detail::fmt(g.x(i)) << ',' << detail::fmt(u[static_cast<std::size_t>(i)]) << '\n';
                continue;
            }
            for (int j = 0; j < g.nx; ++j) {
                os << t << ',' << detail::fmt(g.x(i)) << ',' << detail::fmt(g.x(j)) << ','
                   << detail::fmt(u[static_cast<std::size_t>(i) * static_cast<std::size_t>(g.nx) + static_cast<std::size_t>(j)])
                   << '\n';
            }
        }
    }
}

/**
 * 32-byte header: "GPDE", u16 version, u16 n, u32 nx, u32 stored time
 * intervals, f64 T, f32 lo, f32 hi; then f64 values [slice][x1][x2].
 */
inline void write_pde_binary(const PdeSolution& sol, std::ostream& os) {
    const auto& g = sol.grid();
    const auto lo = static_cast<float>(g.lo), hi = static_cast<float>(g.hi);
    if (static_cast<double>(lo) != g.lo || static_cast<double>(hi) != g.hi) {
        throw std::invalid_argument("write_pde_binary: box bounds are not exactly representable in float32");
    }
    detail::put_magic(os, "GPDE");
    detail::put<std::uint16_t>(os, kDumpVersion);
    detail::put<std::uint16_t>(os, static_cast<std::uint16_t>(g.n));
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(g.nx));
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(sol.slices() - 1));
    detail::put<double>(os, g.T);
    detail::put<float>(os, lo);
    detail::put<float>(os, hi);
    for (double v : sol.all_values()) detail::put<double>(os, v);
}

struct PdeDump {
    std::uint16_t version = 0;
    int n = 1;
    int nx = 0;
    int intervals = 0;
    double T = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> values;

    std::size_t nodes() const {
        return n == 1 ? static_cast<std::size_t>(nx) : static_cast<std::size_t>(nx) * static_cast<std::size_t>(nx);
    }
    double time(int s) const { return s == intervals ? T : T * s / intervals; }
    double x(int i) const { return i == nx - 1 ? hi : lo + i * (hi - lo) / (nx - 1); }
};

inline PdeDump read_pde_binary(std::istream& is) {
    detail::expect_magic(is, "GPDE");
    PdeDump d;
    d.version = detail::get<std::uint16_t>(is);
    if (d.version != kDumpVersion) throw std::runtime_error("GPDE: unsupported version");
    d.n = detail::get<std::uint16_t>(is);
    d.nx = static_cast<int>(detail::get<std::uint32_t>(is));
    d.intervals = static_cast<int>(detail::get<std::uint32_t>(is));
    d.T = detail::get<double>(is);
    d.lo = detail::get<float>(is);
    d.hi = detail::get<float>(is);
    if (d.n < 1 || d.n > 2 || d.nx < 3) throw std::runtime_error("GPDE: bad header");
    const std::size_t count = d.nodes() * static_cast<std::size_t>(d.intervals + 1);
    d.values.resize(count);
    for (auto& v : d.values) v = detail::get<double>(is);
    return d;
}

inline void write_pde_dump_csv(const PdeDump& d, std::ostream& os) {
    os << (d.n == 1 ? "t,x1,u\n" : "t,x1,x2,u\n");
    const std::size_t nodes = d.nodes();
    for (int s = 0; s <= d.intervals; ++s) {
        const std::string t = detail::fmt(d.time(s));
        for (std::size_t k = 0; k < nodes; ++k) {
            const double v = d.values[static_cast<std::size_t>(s) * nodes + k];
            if (d.n == 1) {
                os << t << ',' << detail::fmt(d.x(static_cast<int>(k))) << ',' << detail::fmt(v) << '\n';
            } else {
                const auto nx = static_cast<std::size_t>(d.nx);
                os << t << ',' << detail::fmt(d.x(static_cast<int>(k / nx))) << ',' << detail::fmt(d.x(static_cast<int>(k % nx)))
                   << ',' << detail::fmt(v) << '\n';
            }
        }
    }
}

/// CSV: t, B1..Bd, QV11..QVdd, X1..Xn, path_id.
inline void write_bundle_csv(const PathBundle& b, std::ostream& os) {
    os << 't';
    for (int j = 0; j < b.d; ++j) os << ",B" << j + 1;
    for (int j = 0; j < b.d; ++j)
        for (int k = 0; k < b.d; ++k) os << ",QV" << j + 1 << k + 1;
    for (int i = 0; i < b.n; ++i) os << ",X" << i + 1;
    os << ",path_id\n";
    for (int p = 0; p < b.n_paths; ++p) {
        for (int s = 0; s <= b.n_steps; ++s) {
            os << detail::fmt(b.time(s));
            for (int j = 0; j < b.d; ++j) os << ',' << detail::fmt(b.b(p, s, j));
            for (int j = 0; j < b.d; ++j)
                for (int k = 0; k < b.d; ++k) os << ',' << detail::fmt(b.qv(p, s, j, k));
            for (int i = 0; i < b.n; ++i) os << ',' << detail::fmt(b.x(p, s, i));
            os << ',' << p << '\n';
        }
    }
}

/**
 * 32-byte header: "GMCB", u16 version, u8 n, u8 d, u32 n_paths, u32 n_steps,
 * f64 T, u64 seed; then per path and time step B (d), <B> (d*d), X (n) as f64.
 */
inline void write_bundle_binary(const PathBundle& b, std::ostream& os) {
    detail::put_magic(os, "GMCB");
    detail::put<std::uint16_t>(os, kDumpVersion);
    detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(b.n));
    detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(b.d));
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(b.n_paths));
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(b.n_steps));
    detail::put<double>(os, b.T);
    detail::put<std::uint64_t>(os, b.seed);
    for (int p = 0; p < b.n_paths; ++p)
        for (int s = 0; s <= b.n_steps; ++s) {
            for (int j = 0; j < b.d; ++j) detail::put<double>(os, b.b(p, s, j));
            for (int j = 0; j < b.d; ++j)
                for (int k = 0; k < b.d; ++k) detail::put<double>(os, b.qv(p, s, j, k));
            for (int i = 0; i < b.n; ++i) detail::put<double>(os, b.x(p, s, i));
        }
}

inline PathBundle read_bundle_binary(std::istream& is) {
    detail::expect_magic(is, "GMCB");
    if (detail::get<std::uint16_t>(is) != kDumpVersion) throw std::runtime_error("GMCB: unsupported version");
    PathBundle b;
    b.n = detail::get<std::uint8_t>(is);
    b.d = detail::get<std::uint8_t>(is);
    b.n_paths = static_cast<int>(detail::get<std::uint32_t>(is));
    b.n_steps = static_cast<int>(detail::get<std::uint32_t>(is));
    b.T = detail::get<double>(is);
    b.seed = detail::get<std::uint64_t>(is);
    if (b.n < 1 || b.d < 1 || b.n > kMaxDim || b.d > kMaxDim || b.n_steps < 1) throw std::runtime_error("GMCB: bad header");
    const auto slots = static_cast<std::size_t>(b.n_paths) * static_cast<std::size_t>(b.n_steps + 1);
    const auto d = static_cast<std::size_t>(b.d), n = static_cast<std::size_t>(b.n);
    b.B.resize(slots * d);
    b.QV.resize(slots * d * d);
    b.X.resize(slots * n);
    for (std::size_t o = 0; o < slots; ++o) {
        for (std::size_t j = 0; j < d; ++j) b.B[o * d + j] = detail::get<double>(is);
        for (std::size_t j = 0; j < d * d; ++j) b.QV[o * d * d + j] = detail::get<double>(is);
        for (std::size_t i = 0; i < n; ++i) b.X[o * n + i] = detail::get<double>(is);
    }
    return b;
}

}  // namespace gexpect
