#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace gexpect {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// A draw is a pure function of (key, counter); there is no hidden state, so
// any path/step can be generated independently of scheduling.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += kWeylA;
            key[1] += kWeylB;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMulA = 0xD2511F53u;
    static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

    static Counter single_round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/**
 * Standard normal stream keyed by (seed, stream tag, path index).
 *
 * normals(step, block) returns four independent N(0,1) draws that depend only
 * on (seed, tag, path, step, block). Different tags give independent streams
 * for the same path, which is how search and certification phases are kept
 * apart.
 */
class KeyedNormalStream {
public:
    KeyedNormalStream(std::uint64_t seed, std::uint32_t tag, std::uint64_t path)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          tag_(tag),
          path_lo_(static_cast<std::uint32_t>(path)),
          path_hi_(static_cast<std::uint32_t>(path >> 32) ^ (tag << 16)) {}

    std::array<double, 4> normals(std::uint32_t step, std::uint32_t block = 0) const {
        const Philox4x32::Counter ctr{step, (block << 8) ^ tag_, path_lo_, path_hi_};
        const auto r = Philox4x32::generate(ctr, key_);
        const auto [z0, z1] = box_muller(r[0], r[1]);
        const auto [z2, z3] = box_muller(r[2], r[3]);
        return {z0, z1, z2, z3};
    }

    /// Uniform in (0, 1) built from one 32-bit word.
    static double to_unit(std::uint32_t w) { return (static_cast<double>(w) + 0.5) * 0x1.0p-32; }

private:
    static std::array<double, 2> box_muller(std::uint32_t a, std::uint32_t b) {
        const double u1 = to_unit(a);
        const double u2 = to_unit(b);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(th), r * std::sin(th)};
    }

    Philox4x32::Key key_;
    std::uint32_t tag_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_;
};

}  // namespace gexpect
