#pragma once

// Test functions on [0, 1]: sine modes of the Dirichlet basis, smooth
// functions flat at both endpoints, the cutoff bumps phi_{a,b} / psi_{a,b},
// and the boundary averaging kernels iota_{eps,u}.
//
// Every family carries closed-form derivatives up to order four; nothing
// here differentiates numerically.

#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace lrex {

enum class Space { S, Dirichlet, Neumann, Other };

inline const char* to_string(Space s) {
    switch (s) {
        case Space::S: return "S";
        case Space::Dirichlet: return "S_Dir";
        case Space::Neumann: return "S_Neu";
        default: return "other";
    }
}

/// Value and first four derivatives at a point.
using Jet = std::array<double, 5>;

/// H(x/n), H'(x/n), H''(x/n) for x in Lambda_n; index 0 is site 1.
struct LatticeTable {
    int n = 0;
    std::vector<double> value;
    std::vector<double> d1;
    std::vector<double> d2;

    double at(int x) const { return value[static_cast<std::size_t>(x - 1)]; }
    double d1_at(int x) const { return d1[static_cast<std::size_t>(x - 1)]; }
    double d2_at(int x) const { return d2[static_cast<std::size_t>(x - 1)]; }
};

namespace quad {

inline constexpr int kPanels = 4096;

/// Composite Simpson on [a, b] with an even number of panels.
template <class F>
double simpson(F&& f, double a, double b, int panels = kPanels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// Simpson value together with a Richardson error estimate against the
/// half-resolution rule.
template <class F>
std::pair<double, double> simpson_checked(F&& f, double a, double b, int panels = kPanels) {
    const double fine = simpson(f, a, b, panels);
    const double coarse = simpson(f, a, b, panels / 2);
    return {fine, std::abs(fine - coarse) / 15.0};
}

}  // namespace quad

class TestFunction {
public:
    TestFunction(std::string name, Space space, std::function<Jet(double)> jet)
        : name_(std::move(name)), space_(space), jet_(std::move(jet)) {
        check_space();
        auto [hh, e1] = quad::simpson_checked([this](double u) { return sq(jet_(u)[0]); }, 0.0, 1.0);
        auto [gg, e2] = quad::simpson_checked([this](double u) { return sq(jet_(u)[1]); }, 0.0, 1.0);
        norm_sq_ = hh;
        grad_norm_sq_ = gg;
        quad_error_ = std::max(e1, e2);
    }

    const std::string& name() const { return name_; }
    Space space() const { return space_; }

    Jet jet(double u) const { return jet_(u); }
    double operator()(double u) const { return jet_(u)[0]; }
    double derivative(double u, int order) const { return jet_(u)[static_cast<std::size_t>(order)]; }

    /// ||H||^2 on [0,1] by composite Simpson.
    double l2_norm_sq() const { return norm_sq_; }
    /// ||H'||^2 on [0,1].
    double grad_l2_norm_sq() const { return grad_norm_sq_; }
    /// Richardson estimate of the quadrature error in the two norms above.
    double quadrature_error() const { return quad_error_; }

    LatticeTable tabulate(int n) const {
        LatticeTable t;
        t.n = n;
        const auto sites = static_cast<std::size_t>(n - 1);
        t.value.resize(sites);
        t.d1.resize(sites);
        t.d2.resize(sites);
        for (int x = 1; x <= n - 1; ++x) {
            const Jet j = jet_(static_cast<double>(x) / n);
            const auto i = static_cast<std::size_t>(x - 1);
            t.value[i] = j[0];
            t.d1[i] = j[1];
            t.d2[i] = j[2];
        }
        return t;
    }

    /// Whether every derivative of the listed orders vanishes at 0 and 1.
    bool vanishes_at_ends(std::initializer_list<int> orders, double tol = 1e-12) const {
        const Jet a = jet_(0.0), b = jet_(1.0);
        for (int k : orders) {
            const auto i = static_cast<std::size_t>(k);
            const double scale = std::max(1.0, std::pow(std::numbers::pi * 8.0, k));
            if (std::abs(a[i]) > tol * scale || std::abs(b[i]) > tol * scale) return false;
        }
        return true;
    }

private:
    static double sq(double v) { return v * v; }

    void check_space() const {
        bool ok = true;
        switch (space_) {
            case Space::S: ok = vanishes_at_ends({0, 1, 2, 3, 4}); break;
            case Space::Dirichlet: ok = vanishes_at_ends({0, 2, 4}); break;
            case Space::Neumann: ok = vanishes_at_ends({1, 3}); break;
            case Space::Other: break;
        }
        if (!ok)
            throw std::invalid_argument("test function '" + name_ + "' does not belong to " +
                                        to_string(space_));
    }

    std::string name_;
    Space space_;
    std::function<Jet(double)> jet_;
    double norm_sq_ = 0.0;
    double grad_norm_sq_ = 0.0;
    double quad_error_ = 0.0;
};

/// <H, G> on [0,1] by composite Simpson.
inline double inner_product(const TestFunction& h, const TestFunction& g) {
    return quad::simpson([&](double u) { return h(u) * g(u); }, 0.0, 1.0);
}

/// sqrt(2) sin(k pi u): orthonormal Dirichlet eigenbasis.
inline TestFunction sine_mode(int k) {
    if (k < 1) throw std::invalid_argument("sine_mode: k must be >= 1");
    const double w = k * std::numbers::pi;
    return TestFunction("sine:k=" + std::to_string(k), Space::Dirichlet, [w](double u) {
        const double s = std::numbers::sqrt2 * std::sin(w * u);
        const double c = std::numbers::sqrt2 * std::cos(w * u);
        return Jet{s, w * c, -w * w * s, -w * w * w * c, w * w * w * w * s};
    });
}

namespace detail {

// Derivatives of b(u) = exp(-1/(u(1-u))) on (0,1), zero outside.
inline Jet flat_bump_jet(double u) {
    if (u <= 0.0 || u >= 1.0) return {0, 0, 0, 0, 0};
    const double q = u * (1.0 - u);
    const double g = -1.0 / q;
    if (g < -700.0) return {0, 0, 0, 0, 0};
    const double q1 = 1.0 - 2.0 * u;
    const double q2 = -2.0;
    const double iq = 1.0 / q;
    const double g1 = q1 * iq * iq;
    const double g2 = q2 * iq * iq - 2.0 * q1 * q1 * iq * iq * iq;
    const double g3 = -6.0 * q1 * q2 * iq * iq * iq + 6.0 * q1 * q1 * q1 * iq * iq * iq * iq;
    const double g4 = -6.0 * q2 * q2 * iq * iq * iq + 36.0 * q1 * q1 * q2 * iq * iq * iq * iq -
                      24.0 * q1 * q1 * q1 * q1 * iq * iq * iq * iq * iq;
    const double b = std::exp(g);
    return {b, g1 * b, (g2 + g1 * g1) * b, (g3 + 3.0 * g1 * g2 + g1 * g1 * g1) * b,
            (g4 + 4.0 * g1 * g3 + 3.0 * g2 * g2 + 6.0 * g1 * g1 * g2 + g1 * g1 * g1 * g1) * b};
}

inline Jet polynomial_jet(const std::vector<double>& coeffs, double u) {
    Jet p{0, 0, 0, 0, 0};
    // Horner on value and derivatives simultaneously
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        for (std::size_t k = 4; k >= 1; --k) p[k] = p[k] * u + static_cast<double>(k) * p[k - 1];
        p[0] = p[0] * u + *it;
    }
    return p;
}

inline Jet leibniz(const Jet& f, const Jet& g) {
    static constexpr double C[5][5] = {
        {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
    Jet h{0, 0, 0, 0, 0};
    for (int k = 0; k <= 4; ++k)
        for (int i = 0; i <= k; ++i) h[k] += C[k][i] * f[i] * g[k - i];
    return h;
}

}  // namespace detail

/// p(u) exp(-1/(u(1-u))), scaled to unit L^2 norm when `normalize` is set.
/// Coefficients are in increasing degree.
inline TestFunction smooth_s_function(std::vector<double> coeffs = {1.0}, bool normalize = true) {
    if (coeffs.empty()) throw std::invalid_argument("smooth_s_function: empty polynomial");
    auto raw = [coeffs](double u) {
        return detail::leibniz(detail::polynomial_jet(coeffs, u), detail::flat_bump_jet(u));
    };
    double scale = 1.0;
    if (normalize) {
        const double nsq = quad::simpson([&](double u) { return raw(u)[0] * raw(u)[0]; }, 0.0, 1.0);
        if (!(nsq > 0.0)) throw std::invalid_argument("smooth_s_function: polynomial vanishes on (0,1)");
        scale = 1.0 / std::sqrt(nsq);
    }
    std::ostringstream name;
    name << "smooth:p=";
    for (std::size_t i = 0; i < coeffs.size(); ++i) name << (i ? "," : "") << coeffs[i];
    return TestFunction(name.str(), Space::S, [raw, scale](double u) {
        Jet j = raw(u);
        for (double& v : j) v *= scale;
        return j;
    });
}

/// Cutoff functions built from a(u) = c exp(-1/(u(1-u))) 1_{(0,1)}(u):
/// phi(u) = 1 - int_0^u a, phi_{a,b}(u) = phi(a(u-b)), psi_{a,b}(u) = u phi_{a,b}(u),
/// and the reflection psi_{a,b}(1-u).
struct BumpFamily {
    TestFunction phi;
    TestFunction psi;
    TestFunction psi_reflected;
};

namespace detail {

// Cumulative integral of the normalized bump a on [0,1].
class BumpIntegral {
public:
    static const BumpIntegral& instance() {
        static const BumpIntegral table;
        return table;
    }

    double normalization() const { return c_; }

    /// int_0^v a(t) dt
    double cumulative(double v) const {
        if (v <= 0.0) return 0.0;
        if (v >= 1.0) return 1.0;
        const auto cell = std::min<std::size_t>(static_cast<std::size_t>(v * kCells), kCells - 1);
        const double start = static_cast<double>(cell) / kCells;
        return cum_[cell] + c_ * raw_integral(start, v);
    }

private:
    static constexpr std::size_t kCells = 512;

    static double raw_integral(double a, double b) {
        if (b <= a) return 0.0;
        return boost::math::quadrature::gauss<double, 30>::integrate(
            [](double t) { return flat_bump_jet(t)[0]; }, a, b);
    }

    BumpIntegral() : cum_(kCells + 1, 0.0) {
        std::vector<double> raw(kCells);
        double total = 0.0;
        for (std::size_t i = 0; i < kCells; ++i) {
            raw[i] = raw_integral(static_cast<double>(i) / kCells, static_cast<double>(i + 1) / kCells);
            total += raw[i];
        }
        c_ = 1.0 / total;
        for (std::size_t i = 0; i < kCells; ++i) cum_[i + 1] = cum_[i] + c_ * raw[i];
    }

    double c_ = 0.0;
    std::vector<double> cum_;
};

}  // namespace detail

/// c such that int_0^1 c exp(-1/(u(1-u))) du = 1.
inline double bump_normalization() { return detail::BumpIntegral::instance().normalization(); }

/// a(u) with its derivatives.
inline Jet bump_density_jet(double u) {
    Jet j = detail::flat_bump_jet(u);
    for (double& v : j) v *= bump_normalization();
    return j;
}

inline BumpFamily bump_family(double alpha_cut, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("bump_family: β must lie in (0,1)");
    if (!(alpha_cut > 1.0 / (1.0 - beta)))
        throw std::invalid_argument("bump_family: requires α > (1 − β)^{-1}");
    const auto& table = detail::BumpIntegral::instance();
    const double a = alpha_cut;
    auto phi_jet = [a, beta, &table](double u) {
        const double v = a * (u - beta);
        const Jet d = bump_density_jet(v);
        return Jet{1.0 - table.cumulative(v), -a * d[0], -a * a * d[1], -a * a * a * d[2],
                   -a * a * a * a * d[3]};
    };
    auto psi_jet = [phi_jet](double u) {
        const Jet f = phi_jet(u);
        return Jet{u * f[0], f[0] + u * f[1], 2.0 * f[1] + u * f[2], 3.0 * f[2] + u * f[3],
                   4.0 * f[3] + u * f[4]};
    };
    auto refl_jet = [psi_jet](double u) {
        const Jet f = psi_jet(1.0 - u);
        return Jet{f[0], -f[1], f[2], -f[3], f[4]};
    };
    std::ostringstream tag;
    tag << "alpha=" << alpha_cut << ",beta=" << beta;
    return BumpFamily{
        TestFunction("bump:" + tag.str() + ",part=phi", Space::Neumann, phi_jet),
        TestFunction("bump:" + tag.str() + ",part=psi", Space::Dirichlet, psi_jet),
        TestFunction("bump:" + tag.str() + ",part=psi_reflected", Space::Dirichlet, refl_jet),
    };
}

/// iota_{eps,u} for u in {0, 1}: eps^{-1} times the indicator of the
/// boundary strip of width eps.
struct BoundaryKernel {
    double eps = 0.25;
    int side = 0;  // 0 or 1

    BoundaryKernel(double e, int u) : eps(e), side(u) {
        if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("iota: requires 0 < ε < 1");
        if (u != 0 && u != 1) throw std::invalid_argument("iota: boundary point must be 0 or 1");
    }

    double operator()(double v) const {
        if (side == 0) return (v >= 0.0 && v < eps) ? 1.0 / eps : 0.0;
        return (v >= 1.0 - eps && v < 1.0) ? 1.0 / eps : 0.0;
    }

    /// Number of lattice sites in the strip, floor(eps * n).
    int window(int n) const { return static_cast<int>(std::floor(eps * n)); }

    /// Weights w on Lambda_n with Y^n(iota) = sum_x w_x eta_bar_x; the strip
    /// holds L = floor(eps n) sites and the prefactor is sqrt(n)/L.
    std::vector<double> lattice_weights(int n) const {
        const int L = window(n);
        if (L < 1) throw std::invalid_argument("iota: window floor(εn) is empty");
        if (L > n - 1) throw std::invalid_argument("iota: window exceeds the lattice");
        std::vector<double> w(static_cast<std::size_t>(n - 1), 0.0);
        const double c = std::sqrt(static_cast<double>(n)) / L;
        const int first = side == 0 ? 1 : n - L;
        for (int x = first; x < first + L; ++x) w[static_cast<std::size_t>(x - 1)] = c;
        return w;
    }
};

inline BoundaryKernel iota(double eps, int side) { return BoundaryKernel(eps, side); }

namespace detail {

inline std::map<std::string, std::string> parse_kv_list(const std::string& s) {
    std::map<std::string, std::string> kv;
    std::string key, cur;
    std::vector<std::string> parts;
    std::size_t start = 0;
    // keys are separated by ',' but a key may carry a ','-separated value list
    // (smooth:p=1,0.5); a part without '=' extends the previous value
    while (start <= s.size()) {
        const auto end = s.find(',', start);
        parts.push_back(s.substr(start, end == std::string::npos ? std::string::npos : end - start));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    for (const auto& p : parts) {
        if (p.empty()) continue;
        const auto eq = p.find('=');
        if (eq == std::string::npos) {
            if (key.empty()) throw std::invalid_argument("malformed parameter list '" + s + "'");
            kv[key] += "," + p;
        } else {
            key = p.substr(0, eq);
            kv[key] = p.substr(eq + 1);
        }
    }
    return kv;
}

inline double to_double(const std::string& v, const std::string& what) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') throw std::invalid_argument("cannot parse " + what + "='" + v + "'");
    return d;
}

}  // namespace detail

/// Named test functions: "sine:k=2", "smooth" / "smooth:p=1,0.5",
/// "bump:alpha=8,beta=0.125[,part=phi|psi|psi_reflected]".
inline TestFunction make_test_function(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string family = spec.substr(0, colon);
    const auto kv = detail::parse_kv_list(colon == std::string::npos ? "" : spec.substr(colon + 1));
    auto need = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw std::invalid_argument("test function '" + spec + "' lacks '" + k + "'");
        return it->second;
    };
    auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [k, v] : kv) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || k == a;
            if (!ok) throw std::invalid_argument("test function '" + spec + "': unknown parameter '" + k + "'");
        }
    };
    if (family == "sine") {
        reject_unknown({"k"});
        return sine_mode(static_cast<int>(detail::to_double(need("k"), "k")));
    }
    if (family == "smooth") {
        reject_unknown({"p"});
        std::vector<double> coeffs{1.0};
        if (auto it = kv.find("p"); it != kv.end()) {
            coeffs.clear();
            std::stringstream ss(it->second);
            std::string item;
            while (std::getline(ss, item, ',')) coeffs.push_back(detail::to_double(item, "p"));
        }
        return smooth_s_function(coeffs);
    }
    if (family == "bump") {
        reject_unknown({"alpha", "beta", "part"});
        auto fam = bump_family(detail::to_double(need("alpha"), "alpha"), detail::to_double(need("beta"), "beta"));
        const auto it = kv.find("part");
        const std::string part = it == kv.end() ? "psi" : it->second;
        if (part == "psi") return fam.psi;
        if (part == "phi") return fam.phi;
        if (part == "psi_reflected") return fam.psi_reflected;
        throw std::invalid_argument("bump part must be phi, psi or psi_reflected");
    }
    throw std::invalid_argument("unknown test function family '" + family + "'");
}

}  // namespace lrex
