#include <gtest/gtest.h>

#include <cmath>

#include "lrex/configuration.hpp"
#include "lrex/random.hpp"

using namespace lrex;

TEST(Configuration, IndexRoundTrip) {
    for (std::uint64_t i = 0; i < 512; ++i) {
        const auto c = Configuration::from_index(10, i);
        EXPECT_EQ(c.index(), i);
        EXPECT_EQ(c.particles(), std::popcount(i));
    }
    Configuration big(200);
    big.set(1, true);
    big.set(150, true);
    big.set(199, true);
    EXPECT_EQ(big.particles(), 3);
    EXPECT_EQ(big.to_string().size(), 199u);
}

TEST(Configuration, RangeChecks) {
    Configuration c(8);
    EXPECT_THROW(c.occupied(0), std::out_of_range);
    EXPECT_THROW(c.occupied(8), std::out_of_range);
    EXPECT_NO_THROW(c.occupied(7));
    EXPECT_THROW(c.set(-1, true), std::out_of_range);
}

TEST(Configuration, FlipAndSwap) {
    auto c = Configuration::from_index(6, 0b00101);  // sites 1 and 3
    const auto f = flip(c, 2);
    EXPECT_TRUE(f.occupied(2));
    EXPECT_EQ(f.particles(), 3);
    EXPECT_EQ(flip(f, 2), c);

    const auto s = swap(c, 1, 4);
    EXPECT_FALSE(s.occupied(1));
    EXPECT_TRUE(s.occupied(4));
    EXPECT_EQ(s.particles(), c.particles());
    EXPECT_EQ(swap(s, 4, 1), c);
    // equal occupancies: no change
    EXPECT_EQ(swap(c, 1, 3), c);
    EXPECT_EQ(swap(c, 2, 5), c);
    EXPECT_DOUBLE_EQ(c.centered(1), 0.5);
    EXPECT_DOUBLE_EQ(c.centered(2), -0.5);
}

TEST(Configuration, BernoulliHalfMoments) {
    Stream rng(11, 0);
    const int n = 40, N = 100000;
    std::vector<double> mean(n - 1, 0.0);
    double cov = 0.0;
    for (int k = 0; k < N; ++k) {
        const auto c = sample_bernoulli_half(n, rng);
        for (int x = 1; x < n; ++x) mean[static_cast<std::size_t>(x - 1)] += c.occupied(x) ? 1.0 : 0.0;
        cov += c.centered(5) * c.centered(6);
    }
    for (double m : mean) EXPECT_NEAR(m / N, 0.5, 0.005);
    // E[eta_bar(5) eta_bar(6)] = 0 with sd 0.25/sqrt(N)
    EXPECT_NEAR(cov / N, 0.0, 4.0 * 0.25 / std::sqrt(N));
}

TEST(Configuration, BernoulliSamplingIsReproducible) {
    Stream a(5, 9), b(5, 9);
    for (int k = 0; k < 50; ++k) EXPECT_EQ(sample_bernoulli_half(300, a), sample_bernoulli_half(300, b));
}

TEST(BlockAverage, AnchoredWindows) {
    // n = 9, occupied 1..4
    auto c = Configuration::from_index(9, 0b1111);
    EXPECT_DOUBLE_EQ(block_average(c, 1, 4), 1.0);
    EXPECT_DOUBLE_EQ(block_average(c, 3, 4), 0.5);
    EXPECT_DOUBLE_EQ(block_average(c, 4, 2, Anchor::Left), 1.0);
    EXPECT_DOUBLE_EQ(block_average(c, 5, 4, Anchor::Left), 0.75);
    EXPECT_THROW(block_average(c, 6, 4), std::out_of_range);
    EXPECT_THROW(block_average(c, 2, 4, Anchor::Left), std::out_of_range);
}

TEST(BlockAverage, BoundaryAnchorSwitchesSide) {
    const int n = 9, l = 3;
    EXPECT_EQ(block_window(n, 5, l, Anchor::Boundary).first, 5);
    EXPECT_EQ(block_window(n, 5, l, Anchor::Boundary).last, 7);
    EXPECT_EQ(block_window(n, 6, l, Anchor::Boundary).first, 4);
    EXPECT_EQ(block_window(n, 6, l, Anchor::Boundary).last, 6);
    for (int x = 1; x <= n - 1; ++x) EXPECT_NO_THROW(block_window(n, x, l, Anchor::Boundary)) << x;
}

TEST(Psi, ExplicitValues) {
    // l = 2: psi = 2 ((m - 1/2)^2 - 1/8)
    EXPECT_DOUBLE_EQ(psi_from_block(1.0, 2), 0.25);
    EXPECT_DOUBLE_EQ(psi_from_block(0.0, 2), 0.25);
    EXPECT_DOUBLE_EQ(psi_from_block(0.5, 2), -0.25);
    // equals the product eta_bar(x) eta_bar(x+1) when l = 2
    for (std::uint64_t i = 0; i < 4; ++i) {
        const auto c = Configuration::from_index(3, i);
        EXPECT_DOUBLE_EQ(psi(c, 1, 2), c.centered(1) * c.centered(2));
    }
    EXPECT_THROW(psi_from_block(0.5, 1), std::invalid_argument);
}

TEST(Psi, ExactMomentsAgainstEnumeration) {
    for (int l : {2, 3, 5, 8}) {
        double m1 = 0.0, m2 = 0.0;
        const std::uint64_t S = std::uint64_t{1} << l;
        for (std::uint64_t i = 0; i < S; ++i) {
            const auto c = Configuration::from_index(l + 1, i);
            const double v = psi(c, 1, l);
            m1 += v / S;
            m2 += v * v / S;
        }
        const auto m = psi_moments(l);
        EXPECT_NEAR(m.mean, 0.0, 1e-15);
        EXPECT_NEAR(m.mean, m1, 1e-14);
        EXPECT_NEAR(m.second, m2, 1e-14);
    }
}

TEST(Psi, SwapInsideWindowIsInvariant) {
    Stream rng(12, 0);
    for (int k = 0; k < 200; ++k) {
        const auto c = sample_bernoulli_half(40, rng);
        const double v = psi(c, 10, 8);
        EXPECT_DOUBLE_EQ(psi(swap(c, 11, 16), 10, 8), v);
        EXPECT_DOUBLE_EQ(psi(swap(c, 10, 17), 10, 8), v);
    }
}

TEST(Psi, MonteCarloMeanIsZero) {
    Stream rng(13, 0);
    double s = 0.0;
    const int N = 50000;
    for (int k = 0; k < N; ++k) s += psi(sample_bernoulli_half(64, rng), 20, 16);
    const double sd = std::sqrt(psi_moments(16).second);
    EXPECT_NEAR(s / N, 0.0, 4.0 * sd / std::sqrt(N));
}
