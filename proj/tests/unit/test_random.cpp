#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lrex/alias.hpp"
#include "lrex/random.hpp"
#include "lrex/stats.hpp"

using namespace lrex;

// Known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswers) {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    EXPECT_EQ(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(Philox4x32::apply(C{~0u, ~0u, ~0u, ~0u}, K{~0u, ~0u}),
              (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(Philox4x32::apply(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}),
              (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, BatchedStreamMatchesScalarRounds) {
    const std::uint64_t seed = 0x299f31d0a4093822ull, id = 0x0370734413198a2eull;
    Stream s(seed, id);
    for (std::uint64_t block = 0; block < 40; ++block) {
        const auto ref = Philox4x32::apply(
            {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), static_cast<std::uint32_t>(id),
             static_cast<std::uint32_t>(id >> 32)},
            {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
        for (int w = 0; w < 4; ++w) ASSERT_EQ(s.next_u32(), ref[static_cast<std::size_t>(w)]) << block;
    }
}

TEST(Stream, Reproducible) {
    Stream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool differs_id = false, differs_seed = false;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u32();
        EXPECT_EQ(x, b.next_u32());
        differs_id = differs_id || x != c.next_u32();
        differs_seed = differs_seed || x != d.next_u32();
    }
    EXPECT_TRUE(differs_id);
    EXPECT_TRUE(differs_seed);
}

TEST(Stream, UniformAndNormalMoments) {
    Stream s(1, 0);
    const int N = 200000;
    Moments u, z;
    double z3 = 0.0, z4 = 0.0;
    for (int i = 0; i < N; ++i) {
        const double v = s.uniform();
        ASSERT_GE(v, 0.0);
        ASSERT_LT(v, 1.0);
        u.add(v);
        const double g = s.normal();
        z.add(g);
        z3 += g * g * g;
        z4 += g * g * g * g;
    }
    EXPECT_NEAR(u.mean, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / N));
    EXPECT_NEAR(u.variance(), 1.0 / 12.0, 0.002);
    EXPECT_NEAR(z.mean, 0.0, 3.0 / std::sqrt(N));
    EXPECT_NEAR(z.variance(), 1.0, 3.0 * std::sqrt(2.0 / N));
    EXPECT_NEAR(z3 / N, 0.0, 3.0 * std::sqrt(15.0 / N));
    EXPECT_NEAR(z4 / N, 3.0, 3.0 * std::sqrt(96.0 / N));
}

TEST(Stream, ExponentialMean) {
    Stream s(2, 0);
    Moments m;
    const double rate = 3.5;
    for (int i = 0; i < 200000; ++i) m.add(s.exponential(rate));
    EXPECT_NEAR(m.mean, 1.0 / rate, 3.0 * m.sem());
    EXPECT_NEAR(std::sqrt(m.variance()), 1.0 / rate, 0.01 / rate * 3);
}

TEST(Stream, BelowIsUniform) {
    Stream s(3, 0);
    const std::uint32_t k = 7;
    std::vector<double> counts(k, 0.0);
    const int N = 140000;
    for (int i = 0; i < N; ++i) {
        const auto v = s.below(k);
        ASSERT_LT(v, k);
        counts[v] += 1.0;
    }
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - N / 7.0) * (c - N / 7.0) / (N / 7.0);
    EXPECT_LT(chi2, 22.46);  // 0.999 quantile, 6 dof
}

TEST(Alias, ReconstructsWeightsExactly) {
    const std::vector<double> w = {1.0, 0.0, 3.0, 0.5, 7.25, 1e-6, 2.0};
    AliasTable t(w);
    double total = 0.0;
    for (double v : w) total += v;
    EXPECT_DOUBLE_EQ(t.total_weight(), total);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(t.probability(i), w[i] / total, 1e-14);
}

TEST(Alias, EmpiricalFrequencies) {
    std::vector<double> w;
    for (int l = 1; l <= 30; ++l) w.push_back(std::pow(l, -4.0));
    AliasTable t(w);
    Stream s(4, 0);
    const int N = 1000000;
    std::vector<double> counts(w.size(), 0.0);
    for (int i = 0; i < N; ++i) counts[t.sample(s)] += 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double p = t.probability(i);
        EXPECT_NEAR(counts[i] / N, p, 4.0 * std::sqrt(p * (1 - p) / N) + 1e-9) << i;
    }
}

TEST(Alias, RejectsBadWeights) {
    EXPECT_THROW(AliasTable(std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(AliasTable(std::vector<double>{0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(AliasTable(std::vector<double>{1.0, -1.0}), std::invalid_argument);
}
