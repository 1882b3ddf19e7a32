#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "lrex/engine.hpp"
#include "lrex/fields.hpp"
#include "lrex/oracle.hpp"
#include "lrex/stats.hpp"
#include "lrex/testfns.hpp"

using namespace lrex;

namespace {

KernelParams params(int n, double theta = 1.0) {
    KernelParams p;
    p.n = n;
    p.alpha = 3.0;
    p.gamma = 2.5;
    p.theta = theta;
    return p;
}

// binomial proportion within k standard errors
void expect_frequency(double count, double total, double p, double k = 4.0) {
    const double sd = std::sqrt(p * (1.0 - p) / total);
    EXPECT_NEAR(count / total, p, k * sd + 1e-12);
}

}  // namespace

TEST(EventTables, SingleEventRates) {
    const auto p = params(9, 1.5);
    const auto t = build_event_tables(p);
    const double n2 = 81.0, nt = std::pow(9.0, 1.5);
    EXPECT_DOUBLE_EQ(t.proposal_rate(EventClass::SymBulk, 2, 2), 2.0 * n2 * sym_rate(2, 3.0));
    EXPECT_DOUBLE_EQ(t.proposal_rate(EventClass::AsymBulk, 2, 2), nt * asym_rate(2, 2.5));
    EXPECT_DOUBLE_EQ(t.proposal_rate(EventClass::Annihilation, 7), 0.5 * nt * t.reservoirs.right_at(7));
    EXPECT_DOUBLE_EQ(t.proposal_rate(EventClass::Creation, 7), 0.5 * nt * t.reservoirs.left_at(7));
    EXPECT_DOUBLE_EQ(t.proposal_rate(EventClass::SymReservoir, 7), 0.5 * n2 * t.reservoirs.alpha_at(7));

    EngineOptions rev;
    rev.reversed = true;
    const auto r = build_event_tables(p, rev);
    EXPECT_DOUBLE_EQ(r.proposal_rate(EventClass::Creation, 7), 0.5 * nt * r.reservoirs.right_at(7));
}

TEST(EventTables, TotalRateIsSumOverEvents) {
    const auto p = params(12, 1.2);
    const auto t = build_event_tables(p);
    const double n2 = 144.0, nt = std::pow(12.0, 1.2);
    double direct = 0.0;
    for (int x = 1; x < 12; ++x) {
        for (int y = x + 1; y < 12; ++y) direct += 2.0 * n2 * sym_rate(y - x, 3.0) + nt * asym_rate(y - x, 2.5);
        direct += 0.5 * n2 * t.reservoirs.alpha_at(x) + 0.5 * nt * (t.reservoirs.left_at(x) + t.reservoirs.right_at(x));
    }
    EXPECT_NEAR(t.total_rate, direct, 1e-12 * direct);
    double classes = 0.0;
    for (double v : t.class_rate) classes += v;
    EXPECT_NEAR(classes, t.total_rate, 1e-12 * direct);

    EngineOptions sym;
    sym.asymmetric = false;
    const auto s = build_event_tables(p, sym);
    EXPECT_EQ(s.class_rate[static_cast<std::size_t>(EventClass::AsymBulk)], 0.0);
    EXPECT_EQ(s.class_rate[static_cast<std::size_t>(EventClass::Creation)], 0.0);
}

TEST(Step, AcceptanceRules) {
    const auto t = build_event_tables(params(8));
    Stream rng(21, 0);
    Configuration c = sample_bernoulli_half(8, rng);
    for (int k = 0; k < 20000; ++k) {
        const Configuration before = c;
        const auto r = step(c, t, rng);
        ASSERT_GT(r.dt, 0.0);
        switch (r.cls) {
            case EventClass::SymBulk:
                EXPECT_EQ(r.changed, before.occupied(r.x) != before.occupied(r.y));
                EXPECT_EQ(c.particles(), before.particles());
                break;
            case EventClass::AsymBulk:
                ASSERT_LT(r.x, r.y);
                EXPECT_EQ(r.changed, before.occupied(r.x) && !before.occupied(r.y));
                EXPECT_EQ(c.particles(), before.particles());
                break;
            case EventClass::SymReservoir: EXPECT_TRUE(r.changed); break;
            case EventClass::Creation: EXPECT_EQ(r.changed, !before.occupied(r.x)); break;
            case EventClass::Annihilation: EXPECT_EQ(r.changed, before.occupied(r.x)); break;
        }
        if (!r.changed) EXPECT_EQ(c, before);
        if (r.y == 0) EXPECT_LE(std::abs(c.particles() - before.particles()), 1);
    }
}

TEST(Step, HoldingTimeIsExponentialWithTotalRate) {
    const auto t = build_event_tables(params(4));
    Stream rng(22, 0);
    Configuration c(4);
    Moments m;
    for (int k = 0; k < 200000; ++k) m.add(step(c, t, rng).dt);
    EXPECT_NEAR(m.mean * t.total_rate, 1.0, 0.01);
    EXPECT_NEAR(std::sqrt(m.variance()) * t.total_rate, 1.0, 0.01);
}

TEST(Step, ClassFrequencies) {
    const auto t = build_event_tables(params(16, 1.5));
    Stream rng(23, 0);
    std::array<double, kEventClasses> count{};
    const int N = 1000000;
    for (int k = 0; k < N; ++k) count[static_cast<std::size_t>(detail::propose(t, rng).cls)] += 1.0;
    for (std::size_t c = 0; c < kEventClasses; ++c) expect_frequency(count[c], N, t.class_rate[c] / t.total_rate, 3.5);
}

TEST(Step, OneStepTransitionsMatchGenerator) {
    // one proposal from a fixed state: P(j) = Q(i, j) / R for j != i
    for (bool reversed : {false, true}) {
        const auto p = params(4, 1.0);
        EngineOptions eo;
        eo.reversed = reversed;
        GeneratorOptions go;
        go.reversed = reversed;
        const auto t = build_event_tables(p, eo);
        const auto Q = build_generator(p, go);
        const int N = 200000;
        for (std::uint64_t i : {0u, 5u}) {
            Stream rng(24, i + (reversed ? 10 : 0));
            std::map<std::uint64_t, double> hits;
            for (int k = 0; k < N; ++k) {
                auto c = Configuration::from_index(4, i);
                step(c, t, rng);
                hits[c.index()] += 1.0;
            }
            for (std::size_t j = 0; j < Q.states(); ++j) {
                const double pj = j == i ? 1.0 - Q.exit_rate(i) / t.total_rate : Q(i, j) / t.total_rate;
                expect_frequency(hits[j], N, pj);
            }
        }
    }
}

TEST(Engine, ZeroTimeRecordIsInitialState) {
    const auto p = params(16);
    const auto t = build_event_tables(p);
    const auto H = sine_mode(1).tabulate(16);
    Observables obs(16);
    obs.add_linear("Y", fluctuation_weights(H));
    const auto rec = run(t, obs, Schedule::uniform(0.5, 0.1), 31, 0);
    EXPECT_EQ(rec.times.front(), 0.0);
    EXPECT_EQ(rec.times.back(), 0.5);
    EXPECT_NEAR(rec.value[0][0], fluctuation(rec.initial, H), 1e-12);
    EXPECT_EQ(rec.integral[0][0], 0.0);
}

TEST(Engine, Reproducible) {
    const auto p = params(32, 1.5);
    const auto t = build_event_tables(p);
    const auto H = smooth_s_function().tabulate(32);
    Observables obs(32);
    add_martingale_channels(obs, "h", H, drift_weights(H, p, t.reservoirs));
    const auto a = run(t, obs, Schedule::uniform(0.3, 0.05), 5, 17);
    const auto b = run(t, obs, Schedule::uniform(0.3, 0.05), 5, 17);
    const auto c = run(t, obs, Schedule::uniform(0.3, 0.05), 5, 18);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.integral, b.integral);
    EXPECT_EQ(a.final_state, b.final_state);
    EXPECT_NE(a.value, c.value);
}

TEST(Engine, IncrementalChannelsMatchDirectEvaluation) {
    const auto p = params(24, 1.5);
    const auto t = build_event_tables(p);
    const auto H = sine_mode(2).tabulate(24);
    const auto d = drift_weights(H, p, t.reservoirs);
    Observables obs(24);
    add_martingale_channels(obs, "h", H, d);
    obs.add_quadratic("QV:h", qv_form(H, p, t.reservoirs));
    for (std::uint64_t k = 0; k < 5; ++k) {
        const auto rec = run(t, obs, Schedule::uniform(0.2, 0.1), 6, k);
        ASSERT_GT(rec.telemetry.applied_total(), 100u);
        for (std::size_t j = 0; j < obs.size(); ++j) {
            const double direct = obs.evaluate(j, rec.final_state);
            EXPECT_NEAR(rec.value[j].back(), direct, 1e-9 * (1.0 + std::abs(direct))) << rec.channels[j];
        }
    }
}

TEST(Engine, ParticleNumberMovesOnlyThroughReservoirs) {
    const auto p = params(16);
    EngineOptions eo;
    const auto t = build_event_tables(p, eo);
    Observables obs(16);
    obs.add_linear("N", std::vector<double>(15, 1.0));
    const auto rec = run(t, obs, Schedule::uniform(0.5, 0.5), 7, 0);
    const double dn = rec.final_state.particles() - rec.initial.particles();
    EXPECT_NEAR(rec.value[0].back() - rec.value[0].front(), dn, 1e-12);
    const auto& tel = rec.telemetry;
    const auto res = [&](EventClass c) { return static_cast<double>(tel.applied[static_cast<std::size_t>(c)]); };
    EXPECT_LE(std::abs(dn), res(EventClass::SymReservoir) + res(EventClass::Creation) + res(EventClass::Annihilation));
}

TEST(Engine, StationaryFieldMoments) {
    // start from nu_{1/2}: Y(H) at t keeps mean 0 and variance |H|^2_n / 4
    const int n = 64;
    const auto p = params(n, 1.5);
    const auto t = build_event_tables(p);
    const auto H = sine_mode(1).tabulate(n);
    Observables obs(n);
    obs.add_linear("Y", fluctuation_weights(H));
    obs.add_linear("iota", boundary_weights(n, 0.125, 0));
    double hs = 0.0, is = 0.0;
    for (int x = 1; x < n; ++x) hs += H.at(x) * H.at(x);
    for (double w : boundary_weights(n, 0.125, 0)) is += w * w;
    const double vy = hs / (4.0 * n), vi = is / 4.0;
    Moments y, y2, b2;
    const int N = 2000;
    for (int k = 0; k < N; ++k) {
        const auto rec = run(t, obs, Schedule::uniform(0.25, 0.25), 8, static_cast<std::uint64_t>(k));
        y.add(rec.value[0].back());
        y2.add(rec.value[0].back() * rec.value[0].back());
        b2.add(rec.value[1].back() * rec.value[1].back());
    }
    EXPECT_NEAR(y.mean, 0.0, 4.0 * std::sqrt(vy / N));
    EXPECT_NEAR(y2.mean, vy, 4.0 * y2.sem());
    EXPECT_NEAR(b2.mean, vi, 4.0 * b2.sem());
}

TEST(Engine, TransientParticleCountMatchesOracle) {
    const int n = 5;
    for (bool reversed : {false, true}) {
        const auto p = params(n, 1.5);
        EngineOptions eo;
        eo.reversed = reversed;
        GeneratorOptions go;
        go.reversed = reversed;
        const auto t = build_event_tables(p, eo);
        const auto Q = build_generator(p, go);
        std::vector<double> p0(Q.states(), 0.0);
        p0[0] = 1.0;
        const double horizon = 0.02;
        const auto pt = transient_distribution(Q, p0, horizon).distribution;
        // left half: sites 1, 2
        const auto left = [](const Configuration& c) { return (c.occupied(1) ? 1.0 : 0.0) + (c.occupied(2) ? 1.0 : 0.0); };
        const double exact = exact_expectation(pt, n, left);
        Observables obs(n);
        Configuration empty(n);
        Moments m;
        for (int k = 0; k < 20000; ++k) {
            const auto rec = run(t, obs, Schedule::uniform(horizon, horizon), 9 + reversed, static_cast<std::uint64_t>(k), &empty);
            m.add(left(rec.final_state));
        }
        EXPECT_NEAR(m.mean, exact, 4.0 * m.sem()) << reversed;
    }
}

TEST(Engine, MartingaleSquareMinusBracketHasMeanZero) {
    const int n = 32;
    const auto p = params(n, 1.0);
    const auto t = build_event_tables(p);
    const auto H = sine_mode(1).tabulate(n);
    Observables obs(n);
    add_martingale_channels(obs, "h", H, drift_weights(H, p, t.reservoirs));
    obs.add_quadratic("QV:h", qv_form(H, p, t.reservoirs));
    Moments z, m;
    for (int k = 0; k < 4000; ++k) {
        const auto rec = run(t, obs, Schedule::uniform(0.2, 0.2), 10, static_cast<std::uint64_t>(k));
        const double mt = martingale_path(rec, "h").back();
        m.add(mt);
        z.add(mt * mt - qv_path(rec, "h").back());
    }
    EXPECT_NEAR(m.mean, 0.0, 4.0 * m.sem());
    EXPECT_NEAR(z.mean, 0.0, 4.0 * z.sem());
}

TEST(Engine, RejectsMismatchedInputs) {
    const auto t = build_event_tables(params(8));
    Observables wrong(9);
    EXPECT_THROW(Engine(t, wrong), std::invalid_argument);
    Observables obs(8);
    Configuration c(7);
    Stream rng(1, 1);
    EXPECT_THROW(Engine(t, obs).run(Schedule::uniform(0.1, 0.1), rng, &c), std::invalid_argument);
    EXPECT_THROW(Schedule::explicit_times(1.0, {0.5, 0.2}), std::invalid_argument);
    EXPECT_THROW(Schedule::explicit_times(1.0, {1.5}), std::invalid_argument);
}
