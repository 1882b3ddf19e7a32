#include <gtest/gtest.h>

#include <cmath>

#include "lrex/random.hpp"
#include "lrex/stats.hpp"

using namespace lrex;

TEST(Stats, ConstantSamplesHaveZeroHalfwidth) {
    const auto ci = mean_ci(std::vector<double>(100, 2.5));
    EXPECT_EQ(ci.mean, 2.5);
    EXPECT_EQ(ci.halfwidth, 0.0);
}

TEST(Stats, TooFewSamples) { EXPECT_THROW(mean_ci(std::vector<double>(29, 1.0)), std::invalid_argument); }

TEST(Stats, NormalCoverage) {
    int covered = 0;
    for (std::uint64_t rerun = 0; rerun < 100; ++rerun) {
        Stream rng(2024, rerun);
        std::vector<double> xs(10000);
        for (double& x : xs) x = rng.normal();
        const auto ci = mean_ci(xs);
        EXPECT_LT(std::abs(ci.mean), 0.05);
        covered += ci.covers(0.0) ? 1 : 0;
    }
    EXPECT_GE(covered, 98);
}

TEST(Stats, MergeMatchesConcatenation) {
    Stream rng(4, 0);
    std::vector<double> a(137), b(311);
    for (double& x : a) x = rng.normal() + 3.0;
    for (double& x : b) x = 2.0 * rng.uniform();
    auto ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    auto m = moments_of(a);
    m.merge(moments_of(b));
    const auto whole = moments_of(ab);
    EXPECT_EQ(m.count, whole.count);
    EXPECT_NEAR(m.mean, whole.mean, 1e-14);
    EXPECT_NEAR(m.variance(), whole.variance(), 1e-12);

    EnsembleSummary s1, s2, e;
    for (double x : a) s1.add("y", x);
    for (double x : b) s2.add("y", x);
    auto l = s1;
    l.merge(s2);
    auto r = s2;
    r.merge(s1);
    EXPECT_NEAR(l.observables["y"].moments.mean, r.observables["y"].moments.mean, 1e-14);
    auto id = s1;
    id.merge(e);
    EXPECT_EQ(id.observables["y"].moments.mean, s1.observables["y"].moments.mean);
}

TEST(Stats, AutocovLagZeroIsVariance) {
    Stream rng(8, 0);
    std::vector<double> xs(5000);
    for (double& x : xs) x = rng.normal();
    const auto ac = autocov(xs, 10);
    const auto m = moments_of(xs);
    EXPECT_NEAR(ac[0], m.m2 / static_cast<double>(xs.size()), 1e-12);
    const double sigma = ac[0] / std::sqrt(static_cast<double>(xs.size()));
    for (std::size_t h = 1; h < ac.size(); ++h) EXPECT_LT(std::abs(ac[h]), 3.5 * sigma);
}

TEST(Stats, AutocovOfAr1DecaysGeometrically) {
    // AR(1) with phi = e^{-lambda dt}: the fitted log slope recovers -lambda dt
    const double phi = std::exp(-0.2);
    Stream rng(12, 0);
    std::vector<double> xs(200000);
    double x = 0.0;
    for (double& v : xs) {
        x = phi * x + std::sqrt(1.0 - phi * phi) * rng.normal();
        v = x;
    }
    const auto ac = autocov(xs, 5);
    std::vector<std::pair<double, double>> pts;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t h = 0; h < ac.size(); ++h) {
        const double lx = static_cast<double>(h), ly = std::log(ac[h]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(ac.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT_NEAR(slope / -0.2, 1.0, 0.05);
}

TEST(Stats, ScalingSlopeExact) {
    std::vector<std::pair<double, double>> lin, quad;
    for (double e : {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4}) {
        lin.emplace_back(e, 3.0 * e);
        quad.emplace_back(e, 0.5 * e * e);
    }
    EXPECT_NEAR(scaling_slope(lin).slope, 1.0, 1e-12);
    EXPECT_NEAR(scaling_slope(quad).slope, 2.0, 1e-12);
    EXPECT_NEAR(scaling_slope(lin).std_error, 0.0, 1e-12);
    EXPECT_THROW(scaling_slope({{1.0, 1.0}, {2.0, -1.0}, {3.0, 1.0}}), std::invalid_argument);
    EXPECT_THROW(scaling_slope({{1.0, 1.0}, {2.0, 1.0}}), std::invalid_argument);
}

TEST(Stats, NormalityCalibration) {
    int ok = 0;
    for (std::uint64_t rerun = 0; rerun < 100; ++rerun) {
        Stream rng(77, rerun);
        std::vector<double> xs(10000);
        for (double& x : xs) x = rng.normal();
        const auto s = normality_check(xs);
        ok += (std::abs(s.skew_z) < 3.0 && std::abs(s.kurt_z) < 3.0) ? 1 : 0;
    }
    EXPECT_GE(ok, 97);
}

TEST(Stats, NormalityFlagsBernoulli) {
    Stream rng(5, 0);
    std::vector<double> xs(10000);
    for (double& x : xs) x = rng.coin() ? 1.0 : -1.0;
    EXPECT_LT(normality_check(xs).kurt_z, -20.0);
    EXPECT_THROW(normality_check(std::vector<double>(999, 0.0)), std::invalid_argument);
}
