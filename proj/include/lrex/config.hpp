#pragma once

// Flat key-value experiment configuration with dotted sections:
//
//   model.n = 256
//   model.theta = 1.5
//   observe.test_functions = sine:k=1; smooth
//
// '#' starts a comment. Unknown keys are errors.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>

#include "lrex/kernels.hpp"
#include "lrex/testfns.hpp"

namespace lrex {

struct ExperimentConfig {
    KernelParams model;
    bool reversed = false;
    bool asymmetric = true;

    double horizon = 1.0;
    std::size_t ensemble = 16;
    double sample_dt = 0.01;
    std::uint64_t seed = 1;
    std::string out = "out";

    std::vector<std::string> test_functions = {"sine:k=1"};
    std::vector<int> drift_terms;
    bool qv = false;
    std::vector<double> bg_eps;
    std::vector<double> boundary_eps;
    std::vector<double> energy_eps;
    std::size_t max_lag = 20;

    int spde_modes = 64;
    double spde_dt = 1e-3;
    bool spde_burgers = false;
    double spde_eps = 0.125;

    std::vector<int> criteria;  // empty: all
    double effort = 1.0;

    std::vector<std::string> warnings;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

template <class T>
T parse_scalar(const std::string& key, const std::string& v) {
    try {
        if constexpr (std::is_same_v<T, bool>) {
            const auto s = boost::algorithm::to_lower_copy(v);
            if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
            if (s == "false" || s == "0" || s == "no" || s == "off") return false;
            throw boost::bad_lexical_cast();
        } else {
            if constexpr (std::is_unsigned_v<T>)
                if (!v.empty() && v[0] == '-') throw boost::bad_lexical_cast();
            return boost::lexical_cast<T>(v);
        }
    } catch (const boost::bad_lexical_cast&) {
        throw ConfigError("config: cannot parse value '" + v + "' for key '" + key + "'");
    }
}

// Test-function specs carry their own commas (bump:alpha=8,beta=0.125), so
// the list separator is ';'.
inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, v, boost::algorithm::is_any_of(";"));
    for (auto& p : parts) boost::algorithm::trim(p);
    parts.erase(std::remove(parts.begin(), parts.end(), std::string{}), parts.end());
    return parts;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, v, boost::algorithm::is_any_of(","));
    std::vector<T> out;
    for (auto& p : parts) {
        boost::algorithm::trim(p);
        if (!p.empty()) out.push_back(parse_scalar<T>(key, p));
    }
    return out;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

template <class T>
std::string join(const std::vector<T>& xs, const char* sep = ", ") {
    std::ostringstream os;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) os << sep;
        if constexpr (std::is_floating_point_v<T>)
            os << format_double(xs[i]);
        else
            os << xs[i];
    }
    return os.str();
}

}  // namespace detail

/// Checks the model assumptions and every derived quantity the runners rely
/// on. Throws ConfigError naming the violated inequality.
inline void validate(ExperimentConfig& c) {
    try {
        c.model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const double th = c.model.theta;
    if (th < 0.0 || th > 1.5) {
        std::ostringstream os;
        os << "config: theta=" << th << " is outside 0 ≤ θ ≤ 3/2, the range covered by the fluctuation limit (θ < γ ∧ 2 and θ ≤ 3/2)";
        throw ConfigError(os.str());
    }
    if (th == 1.5) c.warnings.push_back("theta = 3/2: the limit is the stochastic Burgers equation");
    if (!(c.horizon > 0.0)) throw ConfigError("config: run.horizon must be positive");
    if (!(c.sample_dt > 0.0) || c.sample_dt > c.horizon) throw ConfigError("config: run.sample_dt must lie in (0, horizon]");
    for (const auto& name : c.test_functions) {
        try {
            make_test_function(name);
        } catch (const std::exception& e) {
            throw ConfigError("config: observe.test_functions: " + std::string(e.what()));
        }
    }
    for (int j : c.drift_terms)
        if (j < 1 || j > 5) throw ConfigError("config: observe.drift entries must be in 1..5");
    auto check_eps = [&](const std::vector<double>& g, const char* key) {
        for (double e : g)
            if (!(e > 0.0 && e < 0.5)) throw ConfigError(std::string("config: ") + key + " entries must lie in (0, 1/2)");
    };
    check_eps(c.bg_eps, "observe.bg_eps");
    check_eps(c.boundary_eps, "observe.boundary_eps");
    check_eps(c.energy_eps, "observe.energy_eps");
    if (c.spde_modes < 1) throw ConfigError("config: spde.modes must be >= 1");
    if (!(c.spde_dt > 0.0)) throw ConfigError("config: spde.dt must be positive");
    if (!(c.spde_eps > 0.0 && c.spde_eps < 1.0)) throw ConfigError("config: spde.eps must lie in (0, 1)");
    for (int id : c.criteria)
        if (id < 1 || id > 11) throw ConfigError("config: acceptance.criteria ids are 1..11");
    if (!(c.effort > 0.0)) throw ConfigError("config: acceptance.effort must be positive");
}

inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
        {"model.n", [&](auto& k, auto& v) { c.model.n = detail::parse_scalar<int>(k, v); }},
        {"model.alpha", [&](auto& k, auto& v) { c.model.alpha = detail::parse_scalar<double>(k, v); }},
        {"model.gamma", [&](auto& k, auto& v) { c.model.gamma = detail::parse_scalar<double>(k, v); }},
        {"model.theta", [&](auto& k, auto& v) { c.model.theta = detail::parse_scalar<double>(k, v); }},
        {"model.reversed", [&](auto& k, auto& v) { c.reversed = detail::parse_scalar<bool>(k, v); }},
        {"model.asymmetric", [&](auto& k, auto& v) { c.asymmetric = detail::parse_scalar<bool>(k, v); }},
        {"run.horizon", [&](auto& k, auto& v) { c.horizon = detail::parse_scalar<double>(k, v); }},
        {"run.ensemble", [&](auto& k, auto& v) { c.ensemble = detail::parse_scalar<std::size_t>(k, v); }},
        {"run.sample_dt", [&](auto& k, auto& v) { c.sample_dt = detail::parse_scalar<double>(k, v); }},
        {"run.seed", [&](auto& k, auto& v) { c.seed = detail::parse_scalar<std::uint64_t>(k, v); }},
        {"run.out", [&](auto&, auto& v) { c.out = v; }},
        {"observe.test_functions", [&](auto&, auto& v) { c.test_functions = detail::split_list(v); }},
        {"observe.drift", [&](auto& k, auto& v) { c.drift_terms = detail::parse_list<int>(k, v); }},
        {"observe.qv", [&](auto& k, auto& v) { c.qv = detail::parse_scalar<bool>(k, v); }},
        {"observe.bg_eps", [&](auto& k, auto& v) { c.bg_eps = detail::parse_list<double>(k, v); }},
        {"observe.boundary_eps", [&](auto& k, auto& v) { c.boundary_eps = detail::parse_list<double>(k, v); }},
        {"observe.energy_eps", [&](auto& k, auto& v) { c.energy_eps = detail::parse_list<double>(k, v); }},
        {"observe.max_lag", [&](auto& k, auto& v) { c.max_lag = detail::parse_scalar<std::size_t>(k, v); }},
        {"spde.modes", [&](auto& k, auto& v) { c.spde_modes = detail::parse_scalar<int>(k, v); }},
        {"spde.dt", [&](auto& k, auto& v) { c.spde_dt = detail::parse_scalar<double>(k, v); }},
        {"spde.burgers", [&](auto& k, auto& v) { c.spde_burgers = detail::parse_scalar<bool>(k, v); }},
        {"spde.eps", [&](auto& k, auto& v) { c.spde_eps = detail::parse_scalar<double>(k, v); }},
        {"acceptance.criteria", [&](auto& k, auto& v) { c.criteria = detail::parse_list<int>(k, v); }},
        {"acceptance.effort", [&](auto& k, auto& v) { c.effort = detail::parse_scalar<double>(k, v); }},
    };
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        boost::algorithm::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = boost::algorithm::trim_copy(line.substr(0, eq));
        const auto value = boost::algorithm::trim_copy(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (seen.count(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "' (first on line " +
                              std::to_string(seen[key]) + ")");
        seen[key] = lineno;
        it->second(key, value);
    }
    validate(c);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

/// Canonical text of a config with every default filled in; parsing it back
/// yields the same config.
inline std::string to_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "model.n = " << c.model.n << '\n'
       << "model.alpha = " << detail::format_double(c.model.alpha) << '\n'
       << "model.gamma = " << detail::format_double(c.model.gamma) << '\n'
       << "model.theta = " << detail::format_double(c.model.theta) << '\n'
       << "model.reversed = " << (c.reversed ? "true" : "false") << '\n'
       << "model.asymmetric = " << (c.asymmetric ? "true" : "false") << '\n'
       << "run.horizon = " << detail::format_double(c.horizon) << '\n'
       << "run.ensemble = " << c.ensemble << '\n'
       << "run.sample_dt = " << detail::format_double(c.sample_dt) << '\n'
       << "run.seed = " << c.seed << '\n'
       << "run.out = " << c.out << '\n'
       << "observe.test_functions = " << detail::join(c.test_functions, "; ") << '\n'
       << "observe.drift = " << detail::join(c.drift_terms) << '\n'
       << "observe.qv = " << (c.qv ? "true" : "false") << '\n'
       << "observe.bg_eps = " << detail::join(c.bg_eps) << '\n'
       << "observe.boundary_eps = " << detail::join(c.boundary_eps) << '\n'
       << "observe.energy_eps = " << detail::join(c.energy_eps) << '\n'
       << "observe.max_lag = " << c.max_lag << '\n'
       << "spde.modes = " << c.spde_modes << '\n'
       << "spde.dt = " << detail::format_double(c.spde_dt) << '\n'
       << "spde.burgers = " << (c.spde_burgers ? "true" : "false") << '\n'
       << "spde.eps = " << detail::format_double(c.spde_eps) << '\n'
       << "acceptance.criteria = " << detail::join(c.criteria) << '\n'
       << "acceptance.effort = " << detail::format_double(c.effort) << '\n';
    return os.str();
}

}  // namespace lrex
