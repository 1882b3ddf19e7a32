#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/zeta.hpp>

#include "lrex/kernels.hpp"

using namespace lrex;

namespace {

// independent reference: Riemann zeta minus the first K-1 terms
double zeta_tail(std::int64_t K, double s) {
    double head = 0.0;
    for (std::int64_t k = K - 1; k >= 1; --k) head += std::pow(static_cast<double>(k), -s);
    return boost::math::zeta(s) - head;
}

double direct_tail(std::int64_t K, double s, std::int64_t terms = 1000000) {
    double v = 0.0;
    for (std::int64_t k = K + terms - 1; k >= K; --k) v += std::pow(static_cast<double>(k), -s);
    return v;
}

KernelParams params(int n, double alpha = 3.0, double gamma = 2.5, double theta = 1.0) {
    KernelParams p;
    p.n = n;
    p.alpha = alpha;
    p.gamma = gamma;
    p.theta = theta;
    return p;
}

}  // namespace

TEST(Kernels, SymRateExamples) {
    EXPECT_EQ(sym_rate(0, 3.0), 0.0);
    EXPECT_DOUBLE_EQ(sym_rate(2, 3.0), 0.0625);
    EXPECT_NEAR(sym_rate(-3, 3.0), 0.012345679, 1e-9);
    for (int l = -20; l <= 20; ++l) {
        EXPECT_EQ(sym_rate(l, 2.7), sym_rate(-l, 2.7));
        EXPECT_GE(sym_rate(l, 2.7), 0.0);
    }
}

TEST(Kernels, AsymRateExamples) {
    EXPECT_DOUBLE_EQ(asym_rate(1, 2.0), 1.0);
    EXPECT_EQ(asym_rate(-2, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(asym_rate(3, 2.0), 1.0 / 27.0);
    for (int l = -20; l <= 0; ++l) EXPECT_EQ(asym_rate(l, 2.5), 0.0);
}

TEST(Kernels, AsymRateSplitsIntoSymmetricAndAntisymmetricParts) {
    for (int l = -10; l <= 10; ++l) {
        EXPECT_NEAR(asym_rate_sym_part(l, 2.5) + asym_rate_antisym_part(l, 2.5), asym_rate(l, 2.5), 1e-15);
        EXPECT_EQ(asym_rate_sym_part(l, 2.5), asym_rate_sym_part(-l, 2.5));
        EXPECT_EQ(asym_rate_antisym_part(l, 2.5), -asym_rate_antisym_part(-l, 2.5));
    }
}

TEST(Kernels, TailSumMatchesZeta) {
    EXPECT_NEAR(tail_sum(1, 2.0, 1e-12), std::numbers::pi * std::numbers::pi / 6.0, 1e-12);
    EXPECT_NEAR(tail_sum(2, 4.0, 1e-12), std::pow(std::numbers::pi, 4) / 90.0 - 1.0, 1e-12);
    for (double s : {1.5, 2.5, 3.5, 4.0, 5.0})
        for (std::int64_t K : {1, 2, 7, 40, 300}) EXPECT_NEAR(tail_sum(K, s, 1e-12), zeta_tail(K, s), 2e-12) << s << " " << K;
}

TEST(Kernels, TailSumFarOut) {
    const double v = tail_sum(1000000, 2.0, 1e-12);
    EXPECT_NEAR(v, 1e-6, 1e-9);
    EXPECT_LE(v, 1.0 / (1000000 - 1));
}

TEST(Kernels, TailSumRecursion) {
    for (std::int64_t K = 1; K < 50; ++K) {
        const double a = tail_sum(K, 3.0), b = tail_sum(K + 1, 3.0);
        EXPECT_GT(a, b);
        EXPECT_NEAR(a - b, std::pow(static_cast<double>(K), -3.0), 2e-12);
    }
}

TEST(Kernels, TailSumRejectsDivergent) {
    EXPECT_THROW(tail_sum(1, 1.0), std::domain_error);
    EXPECT_THROW(tail_sum(1, 0.5), std::domain_error);
}

TEST(Kernels, LimitConstants) {
    const auto c = limit_constants(3.0, 2.0);
    EXPECT_NEAR(c.A, std::numbers::pi * std::numbers::pi / 3.0, 1e-11);
    EXPECT_NEAR(c.D, 1.644934067, 1e-9);
    EXPECT_NEAR(c.m, std::numbers::pi * std::numbers::pi / 6.0, 1e-11);
    EXPECT_EQ(c.B, c.m);
    for (double a : {2.1, 2.5, 3.0, 4.0, 7.0}) {
        const auto k = limit_constants(a, 2.5);
        EXPECT_EQ(k.D, k.A / 2.0);
        EXPECT_DOUBLE_EQ(k.D / (2.0 * k.A), 0.25);
        EXPECT_NEAR(k.A, 2.0 * boost::math::zeta(a - 1.0), 1e-10);
    }
    EXPECT_THROW(limit_constants(3.0, 1.0), std::domain_error);
    EXPECT_THROW(limit_constants(2.0, 2.0), std::domain_error);
}

TEST(Kernels, ReservoirRateValues) {
    const auto r = reservoir_rates(params(10000));
    EXPECT_NEAR(r.alpha_at(1), boost::math::zeta(4.0) + zeta_tail(9999, 4.0), 1e-12);
    EXPECT_NEAR(r.alpha_at(1), 1.082323234, 1e-9);
    EXPECT_NEAR(r.left_at(1), boost::math::zeta(3.5), 1e-12);
    EXPECT_NEAR(r.left_at(1), 1.126733867, 1e-9);
}

TEST(Kernels, ReservoirRatesAgreeWithDirectSums) {
    const auto p = params(16, 2.5, 2.5, 1.0);
    const double tol = 1e-12;
    const auto r = reservoir_rates(p, tol);
    for (int x = 1; x < p.n; ++x) {
        const double a = direct_tail(x, 3.5) + direct_tail(p.n - x, 3.5);
        // truncating the direct sums at 1e6 terms leaves about 4e-16
        EXPECT_NEAR(r.alpha_at(x), a, 2 * tol + 1e-15);
        EXPECT_NEAR(r.left_at(x), direct_tail(x, 3.5), 2 * tol + 1e-15);
        EXPECT_NEAR(r.right_at(x), direct_tail(p.n - x, 3.5), 2 * tol + 1e-15);
        EXPECT_GT(r.alpha_at(x), 0.0);
        EXPECT_NEAR(r.alpha_at(x), r.alpha_at(p.n - x), 1e-15);
        EXPECT_EQ(r.gamma_at(x), r.left_at(x) + r.right_at(x));
    }
}

TEST(Kernels, ParameterValidationNamesInequality) {
    auto message = [](const KernelParams& p) {
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message(params(16, 1.5)).find("α > 2"), std::string::npos);
    EXPECT_NE(message(params(16, 3.0, 1.2, 1.5)).find("θ < γ ∧ 2"), std::string::npos);
    EXPECT_NE(message(params(16, 3.0, 3.0, 2.0)).find("θ < γ ∧ 2"), std::string::npos);
    EXPECT_THROW(params(2).validate(), std::invalid_argument);
    EXPECT_NO_THROW(params(64, 3.0, 2.5, 1.5).validate());
}
