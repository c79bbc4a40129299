#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include "gexpect/parallel.hpp"
#include "gexpect/random.hpp"

using namespace gexpect;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswerVectors) {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    EXPECT_EQ(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}),
              (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}),
              (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(KeyedNormalStream, PureFunctionOfKeyAndCounter) {
    const KeyedNormalStream a(42, 1, 7), b(42, 1, 7);
    EXPECT_EQ(a.normals(3, 0), b.normals(3, 0));
    // order of calls does not matter
    const auto late = a.normals(1000, 2);
    (void)a.normals(5, 0);
    EXPECT_EQ(a.normals(1000, 2), late);
}

TEST(KeyedNormalStream, TagsPathsAndSeedsSeparateStreams) {
    const auto base = KeyedNormalStream(42, 1, 7).normals(0);
    EXPECT_NE(KeyedNormalStream(42, 2, 7).normals(0), base);
    EXPECT_NE(KeyedNormalStream(42, 1, 8).normals(0), base);
    EXPECT_NE(KeyedNormalStream(43, 1, 7).normals(0), base);
    EXPECT_NE(KeyedNormalStream(42, 1, 7).normals(0, 1), base);
}

TEST(KeyedNormalStream, MomentsOfStandardNormal) {
    double s1 = 0, s2 = 0, s4 = 0, cross = 0;
    const int paths = 20000, steps = 10;
    for (int p = 0; p < paths; ++p) {
        const KeyedNormalStream st(5, 0, static_cast<std::uint64_t>(p));
        for (int s = 0; s < steps; ++s) {
            const auto z = st.normals(static_cast<std::uint32_t>(s));
            for (double v : z) {
                s1 += v;
                s2 += v * v;
                s4 += v * v * v * v;
            }
            cross += z[0] * z[1] + z[2] * z[3];
        }
    }
    const double n = 4.0 * paths * steps;
    // 5 standard errors of each sample moment
    EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
    EXPECT_NEAR(cross / (n / 2.0), 0.0, 5.0 / std::sqrt(n / 2.0));
}

TEST(KeyedNormalStream, UnitMapStaysOpen) {
    EXPECT_GT(KeyedNormalStream::to_unit(0), 0.0);
    EXPECT_LT(KeyedNormalStream::to_unit(0xffffffffu), 1.0);
}

TEST(WorkerPool, CoversEveryIndexOnce) {
    for (unsigned workers : {1u, 2u, 3u, 7u}) {
        WorkerPool pool(workers);
        for (std::size_t count : {0u, 1u, 5u, 1000u}) {
            std::vector<std::atomic<int>> hits(count);
            pool.run(count, [&](std::size_t b, std::size_t e) {
                for (std::size_t i = b; i < e; ++i) hits[i].fetch_add(1);
            });
            for (std::size_t i = 0; i < count; ++i) EXPECT_EQ(hits[i].load(), 1);
        }
    }
}

TEST(WorkerPool, EnvironmentCapsWorkerCount) {
    setenv("GEXPECT_WORKERS", "1", 1);
    EXPECT_EQ(worker_count(), 1u);
    setenv("GEXPECT_WORKERS", "garbage", 1);
    EXPECT_GE(worker_count(), 1u);
    unsetenv("GEXPECT_WORKERS");
}
