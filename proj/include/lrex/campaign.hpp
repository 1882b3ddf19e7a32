#pragma once

// Campaign runners behind the command-line tool. Every runner stages its
// files next to the destination and renames them into place only after all
// of them were written; a failure leaves no partial output behind.

#include <boost/version.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrex/acceptance.hpp"
#include "lrex/config.hpp"
#include "lrex/engine.hpp"
#include "lrex/fields.hpp"
#include "lrex/oracle.hpp"
#include "lrex/parallel.hpp"
#include "lrex/spde.hpp"
#include "lrex/stats.hpp"

namespace lrex {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// CSV

/// Shortest round-trip decimal form; '.' decimal regardless of locale.
inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return detail::format_double(v);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw std::logic_error("csv: row width differs from header");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_field(cells[i]);
        }
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

private:
    std::size_t columns_;
    std::ostringstream out_;
};

// ---------------------------------------------------------------------------
// Staged output

class OutputDir {
public:
    explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }
    OutputDir(const OutputDir&) = delete;
    OutputDir& operator=(const OutputDir&) = delete;
    ~OutputDir() {
        if (!committed_)
            for (const auto& [tmp, dst] : staged_) {
                std::error_code ec;
                std::filesystem::remove(tmp, ec);
            }
    }

    void stage(const std::string& name, const std::string& content) {
        const auto dst = dir_ / name;
        std::filesystem::create_directories(dst.parent_path());
        auto tmp = dst;
        tmp += ".partial";
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f) throw std::runtime_error("cannot write " + tmp.string());
            f << content;
            f.flush();
            if (!f) throw std::runtime_error("write failed for " + tmp.string());
        }
        staged_.emplace_back(tmp, dst);
        files_.push_back({{"name", name}, {"bytes", content.size()}});
    }

    void commit() {
        for (const auto& [tmp, dst] : staged_) std::filesystem::rename(tmp, dst);
        committed_ = true;
    }

    const std::filesystem::path& path() const { return dir_; }
    const nlohmann::json& files() const { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;
    nlohmann::json files_ = nlohmann::json::array();
    bool committed_ = false;
};

struct RunContext {
    std::string command;
    int workers = 0;
};

inline nlohmann::json manifest(const ExperimentConfig& c, const RunContext& ctx, const OutputDir& out,
                               double wall_seconds) {
    std::ostringstream boost_v;
    boost_v << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.' << BOOST_VERSION % 100;
    std::vector<std::string> outputs;
    for (const auto& f : out.files()) outputs.push_back(f["name"]);
    return {{"tool", "lrex"},
            {"version", kVersion},
            {"command", ctx.command},
            {"seed", c.seed},
            {"config", to_text(c)},
            {"warnings", c.warnings},
            {"build", {{"compiler", __VERSION__}, {"cplusplus", __cplusplus}, {"boost", boost_v.str()}}},
            {"workers", ctx.workers <= 0 ? default_workers() : ctx.workers},
            {"outputs", outputs},
            {"wall_seconds", wall_seconds}};
}

inline void finish(OutputDir& out, const ExperimentConfig& c, const RunContext& ctx,
                   std::chrono::steady_clock::time_point t0) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.stage("manifest.json", manifest(c, ctx, out, wall).dump(2) + "\n");
    out.commit();
}

inline nlohmann::json empty_report(const std::string& kind) {
    return {{"kind", kind},
            {"summary", nlohmann::json::array()},
            {"autocovariance", nlohmann::json::array()},
            {"scaling", nlohmann::json::array()},
            {"criteria", nlohmann::json::array()}};
}

namespace detail {

inline nlohmann::json summary_row(const std::string& obs, const std::string& stat, const std::vector<double>& xs) {
    const auto m = moments_of(xs);
    return {{"observable", obs}, {"statistic", stat}, {"value", m.mean}, {"stderr", m.sem()}};
}

inline void add_autocovariance(nlohmann::json& report, const std::string& source, const std::string& obs,
                               const std::vector<std::vector<double>>& series, double dt, std::size_t max_lag) {
    if (series.empty() || series.front().size() <= max_lag) return;
    const auto lp = accept::lag_products(series, max_lag);
    for (std::size_t h = 0; h <= max_lag; ++h) {
        const auto m = moments_of(lp[h]);
        report["autocovariance"].push_back({{"source", source},
                                            {"observable", obs},
                                            {"lag", static_cast<double>(h) * dt},
                                            {"value", m.mean},
                                            {"stderr", m.sem()}});
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate

struct SimulatePlan {
    Observables obs;
    std::vector<std::string> fluctuation_channels;
    struct Scaled {
        std::string family;
        double eps;
        std::string channel;
        bool sup;
    };
    std::vector<Scaled> scaled;
};

inline SimulatePlan plan_simulation(const ExperimentConfig& c, const EventTables& tables) {
    const auto& p = c.model;
    SimulatePlan plan{Observables(p.n), {}, {}};
    const DynamicsVariant variant{c.asymmetric, c.reversed};
    for (const auto& spec : c.test_functions) {
        const auto H = make_test_function(spec).tabulate(p.n);
        const auto y = channel_name("Y", spec);
        plan.obs.add_linear(y, fluctuation_weights(H));
        plan.fluctuation_channels.push_back(y);
        const bool need_drift = !c.drift_terms.empty() || !c.bg_eps.empty();
        const auto d = need_drift ? drift_weights(H, p, tables.reservoirs, variant) : DriftWeights{};
        for (int j : c.drift_terms) {
            const auto name = channel_name("A" + std::to_string(j), spec);
            if (j == 4)
                plan.obs.add_quadratic(name, d.a4);
            else
                plan.obs.add_linear(name, d.linear(j));
        }
        if (c.qv) plan.obs.add_quadratic(channel_name("QV", spec), qv_form(H, p, tables.reservoirs, variant));
        for (double e : c.bg_eps) {
            const auto name = eps_label(channel_name("BG", spec), e);
            plan.obs.add_quadratic(name, bg_comparator_form(H, p, d, e));
            plan.scaled.push_back({channel_name("BG", spec), e, name, false});
        }
        for (double e : c.energy_eps) {
            const auto name = eps_label(channel_name("E", spec), e);
            plan.obs.add_quadratic(name, energy_form(H, e));
            plan.scaled.push_back({channel_name("E", spec), e, name, false});
        }
    }
    for (double e : c.boundary_eps)
        for (int u : {0, 1}) {
            const std::string fam = "iota" + std::to_string(u);
            const auto name = eps_label(fam, e);
            plan.obs.add_linear(name, boundary_weights(p.n, e, u), 0.0, true);
            plan.scaled.push_back({fam, e, name, true});
        }
    return plan;
}

/// Runs the particle ensemble; returns the report written to `out`.
inline nlohmann::json run_simulate(const ExperimentConfig& c, const RunContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    OutputDir out(c.out);
    auto report = empty_report("simulate");
    if (c.ensemble > 0) {
        EngineOptions eo;
        eo.asymmetric = c.asymmetric;
        eo.reversed = c.reversed;
        const auto tables = build_event_tables(c.model, eo);
        const auto plan = plan_simulation(c, tables);
        const auto sched = Schedule::uniform(c.horizon, c.sample_dt);
        const auto recs = parallel_map(c.ensemble, ctx.workers, [&](std::size_t k) {
            Stream rng(c.seed, k);
            return Engine(tables, plan.obs).run(sched, rng);
        });

        CsvWriter series({"source", "trajectory", "channel", "time", "value", "integral"});
        EventTelemetry tel;
        for (std::size_t k = 0; k < recs.size(); ++k) {
            const auto& r = recs[k];
            tel += r.telemetry;
            for (std::size_t ch = 0; ch < r.channels.size(); ++ch)
                for (std::size_t i = 0; i < r.times.size(); ++i)
                    series.row({"particle", std::to_string(k), r.channels[ch], csv_number(r.times[i]),
                                csv_number(r.value[ch][i]), csv_number(r.integral[ch][i])});
        }
        out.stage("series.csv", series.str());

        const auto& names = recs.front().channels;
        for (std::size_t ch = 0; ch < names.size(); ++ch) {
            std::vector<double> mean_value, sq_integral;
            for (const auto& r : recs) {
                double s = 0.0;
                for (double v : r.value[ch]) s += v;
                mean_value.push_back(s / static_cast<double>(r.value[ch].size()));
                const double I = r.integral[ch].back();
                sq_integral.push_back(I * I);
            }
            report["summary"].push_back(detail::summary_row(names[ch], "time_mean", mean_value));
            report["summary"].push_back(detail::summary_row(names[ch], "integral_sq", sq_integral));
        }
        for (const auto& y : plan.fluctuation_channels) {
            std::vector<std::vector<double>> s;
            for (const auto& r : recs) s.push_back(r.value[r.channel(y)]);
            detail::add_autocovariance(report, "particle", y, s, c.sample_dt, c.max_lag);
        }
        for (const auto& sc : plan.scaled) {
            std::vector<double> xs;
            for (const auto& r : recs) {
                if (sc.sup) {
                    xs.push_back(channel_sup_square(r, sc.channel));
                } else {
                    const double I = r.integral[r.channel(sc.channel)].back();
                    xs.push_back(I * I);
                }
            }
            const auto m = moments_of(xs);
            report["scaling"].push_back({{"observable", sc.family + (sc.sup ? ":sup_sq" : ":integral_sq")},
                                         {"scale", sc.eps},
                                         {"value", m.mean},
                                         {"stderr", m.sem()}});
        }
        nlohmann::json t;
        for (std::size_t i = 0; i < kEventClasses; ++i)
            t[to_string(static_cast<EventClass>(i))] = {{"proposed", tel.proposed[i]}, {"applied", tel.applied[i]}};
        report["telemetry"] = t;
        report["total_rate"] = tables.total_rate;
        out.stage("report.json", report.dump(2) + "\n");
    }
    finish(out, c, ctx, t0);
    return report;
}

// ---------------------------------------------------------------------------
// spde

inline nlohmann::json run_spde(const ExperimentConfig& c, const RunContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    OutputDir out(c.out);
    auto report = empty_report("spde");
    if (c.ensemble > 0) {
        const auto consts = SpdeConstants::from(limit_constants(c.model));
        SpdeConstants used = consts;
        if (!c.spde_burgers || c.model.theta < 1.5) used.B = 0.0;
        std::unique_ptr<BurgersOperator> op;
        double dt_cap = c.spde_dt;
        if (c.spde_burgers) {
            op = std::make_unique<BurgersOperator>(c.spde_modes, c.spde_eps, used);
            dt_cap = std::min(dt_cap, op->max_dt());
        }
        // integer number of steps per sample interval, none larger than the cap
        const auto per_sample = static_cast<int>(std::ceil(c.sample_dt / dt_cap - 1e-9));
        const double dt = c.sample_dt / per_sample;
        const auto samples = static_cast<int>(std::llround(c.horizon / c.sample_dt));

        std::vector<std::string> labels;
        std::vector<SpectralExpansion> ex;
        for (const auto& spec : c.test_functions) {
            labels.push_back(channel_name("Y", spec));
            ex.push_back(expand(make_test_function(spec), c.spde_modes));
        }
        const auto paths = parallel_map(c.ensemble, ctx.workers, [&](std::size_t k) {
            Stream rng(c.seed, k);
            return simulate_path(stationary_state(c.spde_modes, used, rng), dt, samples * per_sample, rng, per_sample,
                                 op.get());
        });

        CsvWriter series({"source", "trajectory", "channel", "time", "value", "integral"});
        std::vector<std::vector<std::vector<double>>> by_label(labels.size());
        double max_abs = 0.0;
        for (std::size_t k = 0; k < paths.size(); ++k) {
            const auto& path = paths[k];
            for (std::size_t j = 0; j < labels.size(); ++j) {
                std::vector<double> v;
                double integral = 0.0;
                for (std::size_t i = 0; i < path.y.size(); ++i) {
                    SpectralState s(c.spde_modes, used);
                    s.y = path.y[i];
                    v.push_back(ex[j].pair(s));
                    if (i) integral += 0.5 * (v[i] + v[i - 1]) * (path.times[i] - path.times[i - 1]);
                    series.row({"spde", std::to_string(k), labels[j], csv_number(path.times[i]), csv_number(v[i]),
                                csv_number(integral)});
                }
                by_label[j].push_back(std::move(v));
            }
            for (const auto& y : path.y)
                for (double a : y) max_abs = std::max(max_abs, std::abs(a));
        }
        out.stage("series.csv", series.str());
        for (std::size_t j = 0; j < labels.size(); ++j) {
            std::vector<double> sq;
            for (const auto& v : by_label[j])
                for (double a : v) sq.push_back(a * a);
            report["summary"].push_back(detail::summary_row(labels[j], "second_moment", sq));
            detail::add_autocovariance(report, "spde", labels[j], by_label[j], c.sample_dt, c.max_lag);
        }
        report["stability"] = {{"dt", dt}, {"steps_per_sample", per_sample}, {"max_abs_mode", max_abs},
                               {"burgers", static_cast<bool>(op)}, {"B", used.B}};
        out.stage("report.json", report.dump(2) + "\n");
    }
    finish(out, c, ctx, t0);
    return report;
}

// ---------------------------------------------------------------------------
// oracle-check

/// Exact small-n checks: invariance, reversibility of the symmetric part,
/// drift decomposition and quadratic variation identities.
inline nlohmann::json run_oracle_check(const ExperimentConfig& c, const RunContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& p = c.model;
    if (p.n > kOracleMaxN)
        throw ConfigError("oracle-check: model.n = " + std::to_string(p.n) + " exceeds the enumeration limit " +
                          std::to_string(kOracleMaxN));
    OutputDir out(c.out);
    auto report = empty_report("oracle-check");
    GeneratorOptions go;
    go.include_asymmetric = c.asymmetric;
    go.reversed = c.reversed;
    const auto Q = build_generator(p, go);
    auto check = [&](const std::string& name, double value, double tol) {
        report["checks"].push_back({{"name", name}, {"value", value}, {"tolerance", tol}, {"passed", value < tol}});
    };
    check("stationarity_residual", stationarity_residual(Q), 1e-12);
    GeneratorOptions sym = go;
    sym.include_asymmetric = false;
    check("symmetric_detailed_balance_residual", detailed_balance_residual(build_generator(p, sym)), 1e-12);
    const auto r = reservoir_rates(p);
    const DynamicsVariant v{c.asymmetric, c.reversed};
    for (const auto& spec : c.test_functions) {
        const auto H = make_test_function(spec).tabulate(p.n);
        const auto w = fluctuation_weights(H);
        const auto y = tabulate_observable(p.n, [&](const Configuration& s) { return linear_value(w, s); });
        std::vector<double> y2(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) y2[i] = y[i] * y[i];
        const auto ly = apply_generator(Q, y);
        const auto ly2 = apply_generator(Q, y2);
        const auto d = drift_weights(H, p, r, v);
        const auto q = qv_form(H, p, r, v);
        double drift_defect = 0.0, qv_defect = 0.0;
        for (std::size_t i = 0; i < Q.states(); ++i) {
            const auto s = Configuration::from_index(p.n, i);
            double sum = 0.0;
            for (int j = 1; j <= 5; ++j) sum += drift_term(s, j, d);
            drift_defect = std::max(drift_defect, std::abs(sum - ly[i]));
            qv_defect = std::max(qv_defect, std::abs(q.evaluate(s) - (ly2[i] - 2.0 * y[i] * ly[i])));
        }
        check("drift_identity:" + spec, drift_defect, 1e-10);
        check("qv_identity:" + spec, qv_defect, 1e-10);
    }
    bool all = true;
    for (const auto& ch : report["checks"]) all = all && ch["passed"].get<bool>();
    report["passed"] = all;
    out.stage("report.json", report.dump(2) + "\n");
    finish(out, c, ctx, t0);
    return report;
}

// ---------------------------------------------------------------------------
// acceptance

/// Lifts the plottable parts of the criterion metrics into the common tables.
inline void collect_acceptance_tables(nlohmann::json& report, const CriterionResult& r) {
    const auto& m = r.metrics;
    if (r.id == 7 && m.contains("autocovariance")) {
        for (const auto& row : m["autocovariance"]) {
            const std::string obs = "Y:sine:k=" + std::to_string(row["k"].get<int>());
            report["autocovariance"].push_back({{"source", "particle"}, {"observable", obs}, {"lag", row["lag"]},
                                                {"value", row["particle"]["mean"]}, {"stderr", row["particle"]["se"]}});
            report["autocovariance"].push_back({{"source", "spde"}, {"observable", obs}, {"lag", row["lag"]},
                                                {"value", row["spde"]["mean"]}, {"stderr", row["spde"]["se"]}});
            report["autocovariance"].push_back({{"source", "limit"}, {"observable", obs}, {"lag", row["lag"]},
                                                {"value", row["exact"]}, {"stderr", 0.0}});
        }
        for (const auto& [name, col] : m["remainders"].items())
            for (const auto& row : col)
                report["scaling"].push_back({{"observable", "remainder:" + name}, {"scale", row["n"]},
                                             {"value", row["mean_square"]["mean"]},
                                             {"stderr", row["mean_square"]["se"]}});
    }
    if (r.id == 8 && m.contains("rows"))
        for (const auto& row : m["rows"])
            report["scaling"].push_back({{"observable", "iota0:sup_sq"}, {"scale", row["eps"]},
                                         {"value", row["sup_square"]["mean"]}, {"stderr", row["sup_square"]["se"]}});
    if (r.id == 9 && m.contains("b_theta1.5")) {
        for (const auto& row : m["a_theta1"])
            report["scaling"].push_back({{"observable", "A4:theta=1"}, {"scale", row["n"]},
                                         {"value", row["mean_square"]["mean"]}, {"stderr", row["mean_square"]["se"]}});
        for (const auto& row : m["b_theta1.5"])
            report["scaling"].push_back({{"observable", "BG:theta=1.5"}, {"scale", row["eps"]},
                                         {"value", row["mean_square"]["mean"]}, {"stderr", row["mean_square"]["se"]}});
    }
    if (r.id == 6 && m.contains("rows"))
        for (const auto& row : m["rows"]) {
            report["scaling"].push_back({{"observable", "QV:mean_rate"}, {"scale", row["n"]},
                                         {"value", row["mean_qv_rate"]["mean"]}, {"stderr", row["mean_qv_rate"]["se"]}});
            report["scaling"].push_back({{"observable", "QV:var_rate"}, {"scale", row["n"]},
                                         {"value", row["var_qv_rate"]["mean"]}, {"stderr", row["var_qv_rate"]["se"]}});
        }
}

template <class OnResult>
nlohmann::json run_acceptance_campaign(const ExperimentConfig& c, const RunContext& ctx, OnResult&& on_result) {
    const auto t0 = std::chrono::steady_clock::now();
    OutputDir out(c.out);
    auto report = empty_report("acceptance");
    AcceptanceOptions o;
    o.seed = c.seed;
    o.workers = ctx.workers;
    o.effort = c.effort;
    std::vector<int> ids = c.criteria;
    if (ids.empty())
        for (int i = 1; i <= kCriteria; ++i) ids.push_back(i);
    bool all = true;
    for (int id : ids) {
        const auto r = run_criterion(id, o);
        on_result(r);
        all = all && r.passed;
        report["criteria"].push_back(to_json(r));
        collect_acceptance_tables(report, r);
    }
    report["passed"] = all;
    out.stage("report.json", report.dump(2) + "\n");
    finish(out, c, ctx, t0);
    return report;
}

// ---------------------------------------------------------------------------
// plotdata

/// Tidy long-format tables from a report. Missing sections give header-only
/// files.
inline void emit_plotdata(const nlohmann::json& report, const std::filesystem::path& dir) {
    OutputDir out(dir);
    auto section = [&](const char* key) {
        return report.is_object() && report.contains(key) && report[key].is_array() ? report[key]
                                                                                  : nlohmann::json::array();
    };
    auto num = [](const nlohmann::json& r, const char* key) {
        return r.contains(key) && r[key].is_number() ? csv_number(r[key].get<double>()) : std::string{};
    };

    CsvWriter ac({"source", "observable", "lag", "value", "stderr"});
    for (const auto& r : section("autocovariance"))
        ac.row({r.value("source", ""), r.value("observable", ""), num(r, "lag"), num(r, "value"), num(r, "stderr")});
    out.stage("autocovariance.csv", ac.str());

    CsvWriter sc({"observable", "scale", "value", "stderr"});
    for (const auto& r : section("scaling"))
        sc.row({r.value("observable", ""), num(r, "scale"), num(r, "value"), num(r, "stderr")});
    out.stage("scaling.csv", sc.str());

    CsvWriter su({"observable", "statistic", "value", "stderr"});
    for (const auto& r : section("summary"))
        su.row({r.value("observable", ""), r.value("statistic", ""), num(r, "value"), num(r, "stderr")});
    out.stage("summary.csv", su.str());

    CsvWriter cr({"id", "title", "passed", "seconds", "summary"});
    for (const auto& r : section("criteria"))
        cr.row({std::to_string(r.value("id", 0)), r.value("title", ""), r.value("passed", false) ? "true" : "false",
                num(r, "seconds"), r.value("summary", "")});
    out.stage("criteria.csv", cr.str());
    out.commit();
}

}  // namespace lrex
