#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lrex/campaign.hpp"

using namespace lrex;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("lrex_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

ExperimentConfig small_run(const fs::path& out) {
    auto c = parse_config(
        "model.n = 32\nmodel.theta = 1.5\n"
        "run.horizon = 0.1\nrun.ensemble = 4\nrun.sample_dt = 0.02\nrun.seed = 9\n"
        "observe.test_functions = sine:k=1; smooth\nobserve.drift = 1,2,3,4,5\nobserve.qv = true\n"
        "observe.bg_eps = 0.125,0.25\nobserve.boundary_eps = 0.25\nobserve.max_lag = 2\n");
    c.out = out.string();
    return c;
}

}  // namespace

TEST(Config, Defaults) {
    const auto c = parse_config("");
    EXPECT_EQ(c.model.alpha, 3.0);
    EXPECT_EQ(c.ensemble, 16u);
    EXPECT_EQ(c.test_functions, std::vector<std::string>{"sine:k=1"});
    EXPECT_TRUE(c.criteria.empty());
    EXPECT_TRUE(c.warnings.empty());
}

TEST(Config, ParsesKeysAndComments) {
    const auto c = parse_config(
        "# comment\nmodel.n = 128\nmodel.alpha = 2.5   # trailing\nmodel.reversed = yes\n"
        "observe.test_functions = bump:alpha=8,beta=0.125 ; smooth:p=1,2\nacceptance.criteria = 1, 3\n");
    EXPECT_EQ(c.model.n, 128);
    EXPECT_EQ(c.model.alpha, 2.5);
    EXPECT_TRUE(c.reversed);
    EXPECT_EQ(c.test_functions, (std::vector<std::string>{"bump:alpha=8,beta=0.125", "smooth:p=1,2"}));
    EXPECT_EQ(c.criteria, (std::vector<int>{1, 3}));
}

TEST(Config, InvalidParametersNameTheInequality) {
    EXPECT_NE(error_of("model.alpha = 1.5").find("α > 2"), std::string::npos);
    EXPECT_NE(error_of("model.theta = 1.6\nmodel.gamma = 3").find("θ < γ ∧ 2"), std::string::npos);
    EXPECT_NE(error_of("model.theta = 2.2\nmodel.gamma = 3").find("θ < γ ∧ 2"), std::string::npos);
    EXPECT_FALSE(error_of("model.theta = -0.1").empty());
    EXPECT_EQ(parse_config("model.theta = 1.5").warnings.size(), 1u);
}

TEST(Config, RejectsMalformedInput) {
    EXPECT_NE(error_of("model.colour = red").find("model.colour"), std::string::npos);
    EXPECT_FALSE(error_of("model.n = 16\nmodel.n = 32").empty());
    EXPECT_FALSE(error_of("model.n = sixteen").empty());
    EXPECT_FALSE(error_of("just text").empty());
    EXPECT_FALSE(error_of("run.sample_dt = 0").empty());
    EXPECT_FALSE(error_of("observe.bg_eps = 1.5").empty());
    EXPECT_FALSE(error_of("observe.test_functions = sine").empty());
    EXPECT_FALSE(error_of("acceptance.criteria = 12").empty());
    EXPECT_THROW(load_config("/nonexistent/lrex.cfg"), ConfigError);
}

TEST(Config, CanonicalTextRoundTrips) {
    const auto a = parse_config(
        "model.n = 48\nmodel.theta = 0.2\nrun.sample_dt = 0.2\nobserve.bg_eps = 0.1,0.3\n"
        "observe.test_functions = sine:k=2;smooth:p=1,-2\nspde.burgers = true\n");
    const auto text = to_text(a);
    EXPECT_NE(text.find("run.sample_dt = 0.2\n"), std::string::npos);
    const auto b = parse_config(text);
    EXPECT_EQ(to_text(b), text);
    EXPECT_EQ(b.test_functions, a.test_functions);
    EXPECT_EQ(b.bg_eps, a.bg_eps);
}

TEST(Csv, QuotingAndNumbers) {
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(csv_number(0.1), "0.1");
    EXPECT_EQ(csv_number(-2.5e-12), "-2.5e-12");
    CsvWriter w({"x", "y"});
    w.row({"1", "sine:k=1"});
    EXPECT_EQ(w.str(), "x,y\n1,sine:k=1\n");
}

TEST(Campaign, SimulateIsReproducible) {
    TempDir a, b;
    const auto ca = small_run(a.path() / "run");
    const auto cb = small_run(b.path() / "run");
    const auto ra = run_simulate(ca, {"simulate", 1});
    run_simulate(cb, {"simulate", 2});
    for (const char* f : {"series.csv", "report.json"})
        EXPECT_EQ(slurp(a.path() / "run" / f), slurp(b.path() / "run" / f)) << f;
    EXPECT_TRUE(fs::exists(a.path() / "run" / "manifest.json"));
    for (const auto& e : fs::directory_iterator(a.path() / "run"))
        EXPECT_EQ(e.path().extension().string().find("partial"), std::string::npos);

    const auto series = slurp(a.path() / "run" / "series.csv");
    EXPECT_EQ(series.substr(0, series.find('\n')), "source,trajectory,channel,time,value,integral");
    EXPECT_NE(series.find("BG:sine:k=1@eps=0.125"), std::string::npos);
    EXPECT_NE(series.find("iota0@eps=0.25"), std::string::npos);
    EXPECT_FALSE(ra["summary"].empty());
}

TEST(Campaign, ZeroEnsembleWritesManifestOnly) {
    TempDir d;
    auto c = small_run(d.path() / "run");
    c.ensemble = 0;
    run_simulate(c, {"simulate", 1});
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(d.path() / "run")) files.push_back(e.path().filename().string());
    EXPECT_EQ(files, std::vector<std::string>{"manifest.json"});
    const auto m = nlohmann::json::parse(slurp(d.path() / "run" / "manifest.json"));
    EXPECT_EQ(m["seed"].get<std::uint64_t>(), 9u);
    EXPECT_EQ(m["version"].get<std::string>(), kVersion);
}

TEST(Campaign, PlotdataTables) {
    TempDir d;
    const auto c = small_run(d.path() / "run");
    const auto report = run_simulate(c, {"simulate", 1});
    emit_plotdata(report, d.path() / "plot");
    const auto ac = slurp(d.path() / "plot" / "autocovariance.csv");
    EXPECT_EQ(ac.substr(0, ac.find('\n')), "source,observable,lag,value,stderr");
    // two test functions, lags 0..2
    EXPECT_EQ(lines(ac), 1u + 2u * 3u);
    const auto sc = slurp(d.path() / "plot" / "scaling.csv");
    std::size_t bg = 0;
    for (std::size_t pos = 0; (pos = sc.find("\nBG:sine:k=1", pos)) != std::string::npos; ++pos) ++bg;
    EXPECT_EQ(bg, c.bg_eps.size());
}

TEST(Campaign, PlotdataFromEmptyReport) {
    TempDir d;
    emit_plotdata(nlohmann::json::object(), d.path() / "plot");
    for (const char* f : {"autocovariance.csv", "scaling.csv", "summary.csv", "criteria.csv"})
        EXPECT_EQ(lines(slurp(d.path() / "plot" / f)), 1u) << f;
}

TEST(Campaign, OracleCheck) {
    TempDir d;
    auto c = parse_config("model.n = 6\nmodel.theta = 1.2\nobserve.test_functions = sine:k=1;bump:alpha=4,beta=0.5\n");
    c.out = (d.path() / "oracle").string();
    const auto r = run_oracle_check(c, {"oracle-check", 1});
    EXPECT_TRUE(r["passed"].get<bool>());
    EXPECT_GE(r["checks"].size(), 6u);
    c.model.n = kOracleMaxN + 2;
    EXPECT_ANY_THROW(run_oracle_check(c, {"oracle-check", 1}));
}

TEST(Campaign, AcceptanceSubset) {
    TempDir d;
    auto c = parse_config("acceptance.criteria = 1, 10\n");
    c.out = (d.path() / "acc").string();
    std::vector<int> seen;
    const auto r = run_acceptance_campaign(c, {"acceptance", 1}, [&](const CriterionResult& x) { seen.push_back(x.id); });
    EXPECT_EQ(seen, (std::vector<int>{1, 10}));
    EXPECT_TRUE(r["passed"].get<bool>());
    EXPECT_EQ(r["criteria"].size(), 2u);
    EXPECT_TRUE(fs::exists(d.path() / "acc" / "report.json"));
}
