// lrex: particle simulations, exact checks, spectral SPDE paths and the
// acceptance suite behind one command.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lrex/campaign.hpp"

namespace {

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "experiment config (flat dotted key = value)");
    sub->add_option("--seed", c.seed, "master seed (overrides run.seed)");
    sub->add_option("--workers", c.workers, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", c.out, "output directory (overrides run.out)");
}

lrex::ExperimentConfig resolve(const Common& c, CLI::App* sub) {
    auto cfg = c.config.empty() ? lrex::parse_config("") : lrex::load_config(c.config);
    if (sub->count("--seed")) cfg.seed = c.seed;
    if (!c.out.empty()) cfg.out = c.out;
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Long-range exclusion with reservoirs: fluctuation experiments"};
    app.require_subcommand(1);

    Common sim, orc, spd, acc, plt;
    auto* simulate = app.add_subcommand("simulate", "run a particle ensemble and record field channels");
    add_common(simulate, sim);
    auto* oracle = app.add_subcommand("oracle-check", "exact generator checks by enumeration (n <= 10)");
    add_common(oracle, orc);
    auto* spde = app.add_subcommand("spde", "spectral OU / Burgers paths");
    add_common(spde, spd);
    auto* acceptance = app.add_subcommand("acceptance", "run the acceptance criteria");
    add_common(acceptance, acc);
    std::vector<int> only;
    acceptance->add_option("--only", only, "criterion ids (overrides acceptance.criteria)")->check(CLI::Range(1, 11));
    auto* plotdata = app.add_subcommand("plotdata", "tidy CSV tables from a report");
    add_common(plotdata, plt);
    std::string report_path;
    plotdata->add_option("--report", report_path, "report.json to read (default: <out>/report.json)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            const auto cfg = resolve(sim, simulate);
            const auto r = lrex::run_simulate(cfg, {"simulate", sim.workers});
            std::cout << "simulate: " << cfg.ensemble << " trajectories -> " << cfg.out << '\n';
            return 0;
        }
        if (*oracle) {
            const auto cfg = resolve(orc, oracle);
            const auto r = lrex::run_oracle_check(cfg, {"oracle-check", orc.workers});
            for (const auto& ch : r["checks"])
                std::cout << (ch["passed"].get<bool>() ? "PASS  " : "FAIL  ") << ch["name"].get<std::string>() << " = "
                          << ch["value"].get<double>() << " (tol " << ch["tolerance"].get<double>() << ")\n";
            return r["passed"].get<bool>() ? 0 : 1;
        }
        if (*spde) {
            const auto cfg = resolve(spd, spde);
            const auto r = lrex::run_spde(cfg, {"spde", spd.workers});
            std::cout << "spde: " << cfg.ensemble << " paths -> " << cfg.out << '\n';
            return 0;
        }
        if (*acceptance) {
            auto cfg = resolve(acc, acceptance);
            if (!only.empty()) cfg.criteria = only;
            const auto r = lrex::run_acceptance_campaign(cfg, {"acceptance", acc.workers}, [](const auto& res) {
                std::cout << lrex::format_line(res) << std::endl;
            });
            return r["passed"].get<bool>() ? 0 : 1;
        }
        if (*plotdata) {
            const auto cfg = resolve(plt, plotdata);
            const std::filesystem::path src = report_path.empty() ? std::filesystem::path(cfg.out) / "report.json"
                                                                  : std::filesystem::path(report_path);
            nlohmann::json report = nlohmann::json::object();
            if (std::filesystem::exists(src)) {
                std::ifstream f(src);
                report = nlohmann::json::parse(f);
            } else {
                std::cerr << "warning: " << src.string() << " not found, writing header-only tables\n";
            }
            lrex::emit_plotdata(report, std::filesystem::path(cfg.out) / "plot");
            std::cout << "plotdata -> " << (std::filesystem::path(cfg.out) / "plot").string() << '\n';
            return 0;
        }
    } catch (const lrex::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
