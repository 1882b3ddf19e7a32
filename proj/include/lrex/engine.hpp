#pragma once

// Exact simulation of L_n = n^2 L_s + n^theta L_a by uniformized thinning.
//
// Every event class proposes at a configuration-independent rate; a proposal
// is applied when the occupancy indicators of the generator allow it. The
// total proposal rate is therefore constant, waiting times are
// Exponential(R_total), and rejected proposals only advance the clock.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrex/alias.hpp"
#include "lrex/configuration.hpp"
#include "lrex/kernels.hpp"
#include "lrex/observables.hpp"
#include "lrex/random.hpp"

namespace lrex {

enum class EventClass : std::uint8_t { SymBulk = 0, AsymBulk, SymReservoir, Creation, Annihilation };
inline constexpr std::size_t kEventClasses = 5;

inline const char* to_string(EventClass c) {
    switch (c) {
        case EventClass::SymBulk: return "sym_bulk";
        case EventClass::AsymBulk: return "asym_bulk";
        case EventClass::SymReservoir: return "sym_reservoir";
        case EventClass::Creation: return "creation";
        default: return "annihilation";
    }
}

struct EngineOptions {
    bool asymmetric = true;
    /// Adjoint dynamics: p_gamma(.) replaced by p_gamma(-.).
    bool reversed = false;
    double tol = 1e-12;
};

struct EventEntry {
    EventClass cls;
    std::int32_t a;  // jump length for bulk classes, site for reservoir classes
};

struct EventTables {
    KernelParams params;
    EngineOptions options;
    ReservoirRates reservoirs;
    std::array<double, kEventClasses> class_rate{};
    double total_rate = 0.0;
    std::vector<EventEntry> entries;
    std::vector<double> entry_rate;
    AliasTable alias;

    int n() const { return params.n; }

    /// Proposal rate of one specific event: a bond {x, x+l}, an ordered pair
    /// (x, x+l) or a reservoir move at site x.
    double proposal_rate(EventClass c, int x, int l = 0) const {
        const double n2 = static_cast<double>(params.n) * params.n;
        const double nt = std::pow(static_cast<double>(params.n), params.theta);
        switch (c) {
            case EventClass::SymBulk: return 2.0 * n2 * sym_rate(l, params.alpha);
            case EventClass::AsymBulk: return options.asymmetric ? nt * asym_rate(l, params.gamma) : 0.0;
            case EventClass::SymReservoir: return 0.5 * n2 * reservoirs.alpha_at(x);
            case EventClass::Creation:
                return options.asymmetric
                           ? 0.5 * nt * (options.reversed ? reservoirs.right_at(x) : reservoirs.left_at(x))
                           : 0.0;
            default:
                return options.asymmetric
                           ? 0.5 * nt * (options.reversed ? reservoirs.left_at(x) : reservoirs.right_at(x))
                           : 0.0;
        }
    }
};

inline EventTables build_event_tables(const KernelParams& p, const EngineOptions& opt = {}) {
    p.validate();
    EventTables t;
    t.params = p;
    t.options = opt;
    t.reservoirs = reservoir_rates(p, opt.tol);
    const int n = p.n;
    auto push = [&](EventClass c, int a, double w) {
        if (w <= 0.0) return;
        t.entries.push_back({c, a});
        t.entry_rate.push_back(w);
        t.class_rate[static_cast<std::size_t>(c)] += w;
    };
    for (int l = 1; l <= n - 2; ++l) {
        const double bonds = n - 1 - l;
        push(EventClass::SymBulk, l, bonds * t.proposal_rate(EventClass::SymBulk, 0, l));
        if (opt.asymmetric) push(EventClass::AsymBulk, l, bonds * t.proposal_rate(EventClass::AsymBulk, 0, l));
    }
    for (int x = 1; x <= n - 1; ++x) {
        push(EventClass::SymReservoir, x, t.proposal_rate(EventClass::SymReservoir, x));
        if (opt.asymmetric) {
            push(EventClass::Creation, x, t.proposal_rate(EventClass::Creation, x));
            push(EventClass::Annihilation, x, t.proposal_rate(EventClass::Annihilation, x));
        }
    }
    t.total_rate = 0.0;
    for (double r : t.class_rate) t.total_rate += r;
    t.alias = AliasTable(std::span<const double>(t.entry_rate));
    return t;
}

struct StepResult {
    EventClass cls = EventClass::SymBulk;
    int x = 0;
    int y = 0;  // second site for bulk events, 0 otherwise
    double dt = 0.0;
    bool changed = false;
};

namespace detail {

struct Proposal {
    EventClass cls;
    int x;
    int y;
};

inline Proposal propose(const EventTables& t, Stream& rng) {
    const EventEntry e = t.entries[t.alias.sample(rng)];
    const int n = t.params.n;
    switch (e.cls) {
        case EventClass::SymBulk:
        case EventClass::AsymBulk: {
            const int x = 1 + static_cast<int>(rng.below(static_cast<std::uint32_t>(n - 1 - e.a)));
            return {e.cls, x, x + e.a};
        }
        default: return {e.cls, e.a, 0};
    }
}

// Whether the proposal changes the configuration.
inline bool accepts(const EventTables& t, const Configuration& c, const Proposal& p) {
    switch (p.cls) {
        case EventClass::SymBulk: return c.test(p.x) != c.test(p.y);
        case EventClass::AsymBulk:
            // forward: x -> x+l; adjoint: x+l -> x
            return t.options.reversed ? (c.test(p.y) && !c.test(p.x)) : (c.test(p.x) && !c.test(p.y));
        case EventClass::SymReservoir: return true;
        case EventClass::Creation: return !c.test(p.x);
        default: return c.test(p.x);
    }
}

}  // namespace detail

/// One thinning step: draws the waiting time and a proposal, applies it if
/// the indicators allow.
inline StepResult step(Configuration& c, const EventTables& t, Stream& rng) {
    if (c.n() != t.params.n) throw std::invalid_argument("step: configuration and tables disagree on n");
    StepResult r;
    r.dt = rng.exponential(t.total_rate);
    const auto p = detail::propose(t, rng);
    r.cls = p.cls;
    r.x = p.x;
    r.y = p.y;
    r.changed = detail::accepts(t, c, p);
    if (r.changed) {
        c.toggle(p.x);
        if (p.y) c.toggle(p.y);
    }
    return r;
}

struct EventTelemetry {
    std::array<std::uint64_t, kEventClasses> proposed{};
    std::array<std::uint64_t, kEventClasses> applied{};

    std::uint64_t total_proposed() const {
        std::uint64_t s = 0;
        for (auto v : proposed) s += v;
        return s;
    }

    std::uint64_t applied_total() const {
        std::uint64_t s = 0;
        for (auto v : applied) s += v;
        return s;
    }

    double acceptance(EventClass c) const {
        const auto i = static_cast<std::size_t>(c);
        return proposed[i] ? static_cast<double>(applied[i]) / static_cast<double>(proposed[i]) : 0.0;
    }

    EventTelemetry& operator+=(const EventTelemetry& o) {
        for (std::size_t i = 0; i < kEventClasses; ++i) {
            proposed[i] += o.proposed[i];
            applied[i] += o.applied[i];
        }
        return *this;
    }
};

/// Sample times in macroscopic units; the last one is the horizon.
struct Schedule {
    double horizon = 0.0;
    std::vector<double> times;

    static Schedule uniform(double horizon, double dt) {
        if (horizon < 0.0) throw std::invalid_argument("Schedule: negative horizon");
        if (!(dt > 0.0)) throw std::invalid_argument("Schedule: sample step must be positive");
        Schedule s;
        s.horizon = horizon;
        const auto k = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
        for (std::size_t i = 0; i <= k; ++i) s.times.push_back(std::min(horizon, static_cast<double>(i) * dt));
        if (horizon - s.times.back() < 1e-9 * dt) s.times.back() = horizon;
        else s.times.push_back(horizon);
        return s;
    }

    static Schedule explicit_times(double horizon, std::vector<double> times) {
        Schedule s;
        s.horizon = horizon;
        s.times = std::move(times);
        s.validate();
        return s;
    }

    void validate() const {
        if (times.empty()) throw std::invalid_argument("Schedule: no sample times");
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (times[i] < 0.0) throw std::invalid_argument("Schedule: negative sample time");
            if (times[i] > horizon) throw std::invalid_argument("Schedule: sample time beyond horizon");
            if (i && !(times[i] > times[i - 1])) throw std::invalid_argument("Schedule: times must increase");
        }
    }
};

struct TrajectoryRecord {
    std::vector<std::string> channels;
    std::vector<double> times;
    std::vector<std::vector<double>> value;     // [channel][sample]
    std::vector<std::vector<double>> integral;  // [channel][sample], from time 0
    std::vector<double> sup_integral_sq;        // max over [0, T] of (integral)^2, tracked channels
    EventTelemetry telemetry;
    Configuration initial;
    Configuration final_state;

    std::size_t channel(const std::string& name) const {
        for (std::size_t i = 0; i < channels.size(); ++i)
            if (channels[i] == name) return i;
        throw std::out_of_range("record has no channel '" + name + "'");
    }
    bool has_channel(const std::string& name) const {
        return std::find(channels.begin(), channels.end(), name) != channels.end();
    }
};

/// Runs one trajectory. `initial` defaults to a nu_{1/2} draw from `rng`.
class Engine {
public:
    Engine(const EventTables& tables, const Observables& obs) : t_(tables), obs_(obs) {
        if (obs.n() != 0 && obs.n() != tables.n())
            throw std::invalid_argument("Engine: observables built for another n");
    }

    TrajectoryRecord run(const Schedule& schedule, Stream& rng, const Configuration* initial = nullptr) {
        schedule.validate();
        const int n = t_.n();
        Configuration c = initial ? *initial : sample_bernoulli_half(n, rng);
        if (c.n() != n) throw std::invalid_argument("Engine: initial configuration has wrong n");

        const std::size_t L = obs_.linear_count();
        const std::size_t Qn = obs_.quadratic_count();
        const std::size_t C = L + Qn;
        const auto& site_major = obs_.site_major();

        eta_bar_ = Observables::centered_vector(c);
        value_.assign(C, 0.0);
        integral_.assign(C, 0.0);
        sup_.assign(C, 0.0);
        track_.assign(C, false);
        for (std::size_t j = 0; j < L; ++j) track_[j] = obs_.linear(j).track_sup;
        for (std::size_t q = 0; q < Qn; ++q) track_[L + q] = obs_.quadratic(q).track_sup;
        resync(c);

        TrajectoryRecord rec;
        rec.channels = obs_.names();
        rec.times = schedule.times;
        rec.value.assign(C, std::vector<double>(schedule.times.size()));
        rec.integral.assign(C, std::vector<double>(schedule.times.size()));
        rec.initial = c;

        double t = 0.0;
        double t_last = 0.0;  // time up to which integrals are accumulated
        std::size_t next = 0;
        const double R = t_.total_rate;

        auto integrate_to = [&](double s) {
            const double h = s - t_last;
            if (h > 0.0)
                for (std::size_t j = 0; j < C; ++j) integral_[j] += value_[j] * h;
            t_last = s;
            for (std::size_t j = 0; j < C; ++j)
                if (track_[j]) sup_[j] = std::max(sup_[j], integral_[j] * integral_[j]);
        };
        auto record = [&](std::size_t k) {
            integrate_to(schedule.times[k]);
            if (Qn) resync_quadratic();
            for (std::size_t j = 0; j < C; ++j) {
                rec.value[j][k] = value_[j];
                rec.integral[j][k] = integral_[j];
            }
        };
        auto apply_flip = [&](int x) {
            const auto i = static_cast<std::size_t>(x - 1);
            const double delta = c.test(x) ? -1.0 : 1.0;
            const double* w = &site_major[i * L];
            for (std::size_t j = 0; j < L; ++j) value_[j] += delta * w[j];
            for (std::size_t q = 0; q < Qn; ++q) {
                const auto& ch = obs_.quadratic(q);
                const double row = ch.form.row(x, eta_bar_, products_[q]);
                value_[L + q] += delta * (ch.form.linear()[i] + 2.0 * row + ch.diagonal[i] * delta);
            }
            for (std::size_t q = 0; q < Qn; ++q) {
                const auto& groups = obs_.quadratic(q).form.toeplitz();
                for (std::size_t k = 0; k < groups.size(); ++k)
                    for (std::size_t r = 0; r < groups[k].g.size(); ++r)
                        products_[q][k][r][i] += groups[k].g[r][i] * delta;
            }
            eta_bar_[i] += delta;
            c.toggle(x);
        };

        while (next < schedule.times.size() && schedule.times[next] <= 0.0) record(next++);
        for (;;) {
            const double t_next = t + rng.exponential(R);
            while (next < schedule.times.size() && schedule.times[next] < t_next) record(next++);
            if (t_next > schedule.horizon) break;
            t = t_next;
            const auto p = detail::propose(t_, rng);
            const auto ci = static_cast<std::size_t>(p.cls);
            ++rec.telemetry.proposed[ci];
            if (!detail::accepts(t_, c, p)) continue;
            ++rec.telemetry.applied[ci];
            integrate_to(t);
            apply_flip(p.x);
            if (p.y) apply_flip(p.y);
        }
        while (next < schedule.times.size()) record(next++);

        rec.sup_integral_sq = sup_;
        rec.final_state = c;
        return rec;
    }

private:
    void resync(const Configuration& c) {
        const std::size_t L = obs_.linear_count();
        for (std::size_t j = 0; j < L; ++j) value_[j] = obs_.evaluate_linear(j, c);
        resync_quadratic();
    }

    void resync_quadratic() {
        const std::size_t L = obs_.linear_count();
        products_.resize(obs_.quadratic_count());
        for (std::size_t q = 0; q < obs_.quadratic_count(); ++q) {
            const auto& form = obs_.quadratic(q).form;
            products_[q] = form.products(eta_bar_);
            value_[L + q] = form.evaluate(eta_bar_);
        }
    }

    const EventTables& t_;
    const Observables& obs_;
    std::vector<double> eta_bar_;
    std::vector<std::vector<std::vector<std::vector<double>>>> products_;  // [channel][group][r]
    std::vector<double> value_;
    std::vector<double> integral_;
    std::vector<double> sup_;
    std::vector<bool> track_;
};

/// Convenience wrapper: one trajectory with stream (seed, trajectory id).
inline TrajectoryRecord run(const EventTables& tables, const Observables& obs, const Schedule& schedule,
                            std::uint64_t seed, std::uint64_t trajectory, const Configuration* initial = nullptr) {
    Stream rng(seed, trajectory);
    Engine e(tables, obs);
    return e.run(schedule, rng, initial);
}

}  // namespace lrex
