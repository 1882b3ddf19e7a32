#pragma once

// Density fluctuation field Y^n(H), the decomposition of L_n Y^n(H) into the
// five drift terms A^{n,1..5}, the quadratic-variation integrand, and the
// comparator functionals (second-order Boltzmann-Gibbs, boundary, energy).
//
// Everything is expressed in the centred variables eta_bar = eta - 1/2 as a
// linear weight vector or a QuadraticForm, so the engine can integrate it
// exactly along a trajectory.

#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrex/configuration.hpp"
#include "lrex/engine.hpp"
#include "lrex/kernels.hpp"
#include "lrex/observables.hpp"
#include "lrex/testfns.hpp"

namespace lrex {

struct FieldScales {
    int n = 0;
    double sqrt_n = 0.0;
    double n2 = 0.0;      // n^2
    double ntheta = 0.0;  // n^theta

    explicit FieldScales(const KernelParams& p)
        : n(p.n),
          sqrt_n(std::sqrt(static_cast<double>(p.n))),
          n2(static_cast<double>(p.n) * p.n),
          ntheta(std::pow(static_cast<double>(p.n), p.theta)) {}
};

/// Weights of Y^n(H) = n^{-1/2} sum_x H(x/n) eta_bar_x.
inline std::vector<double> fluctuation_weights(const LatticeTable& H) {
    const double s = 1.0 / std::sqrt(static_cast<double>(H.n));
    std::vector<double> w(H.value.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = s * H.value[i];
    return w;
}

inline double linear_value(const std::vector<double>& w, const Configuration& c) {
    double v = 0.0;
    for (int x = 1; x <= c.sites(); ++x) v += w[static_cast<std::size_t>(x - 1)] * c.centered(x);
    return v;
}

inline double fluctuation(const Configuration& c, const LatticeTable& H) {
    if (H.n != c.n()) throw std::invalid_argument("fluctuation: test function tabulated for another n");
    return linear_value(fluctuation_weights(H), c);
}

/// Options shared by the drift and quadratic-variation builders.
struct DynamicsVariant {
    bool asymmetric = true;
    bool reversed = false;  // adjoint asymmetric part

    static DynamicsVariant of(const EngineOptions& o) { return {o.asymmetric, o.reversed}; }
};

struct DriftWeights {
    int n = 0;
    std::vector<double> w1;  // A^{n,1}
    std::vector<double> w2;  // A^{n,2}
    std::vector<double> w3;  // A^{n,3}
    std::vector<double> w5;  // A^{n,5}
    QuadraticForm a4;        // A^{n,4}

    const std::vector<double>& linear(int j) const {
        switch (j) {
            case 1: return w1;
            case 2: return w2;
            case 3: return w3;
            case 5: return w5;
            default: throw std::invalid_argument("drift term " + std::to_string(j) + " is not linear");
        }
    }

    /// w1 + w2 + w3 + w5.
    std::vector<double> linear_total() const {
        std::vector<double> w(w1.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = w1[i] + w2[i] + w3[i] + w5[i];
        return w;
    }
};

namespace detail {

inline std::vector<double> toeplitz_table(int n, const std::function<double(std::int64_t)>& f) {
    std::vector<double> T(static_cast<std::size_t>(2 * (n - 1) - 1));
    for (int l = -(n - 2); l <= n - 2; ++l) T[static_cast<std::size_t>(l + n - 2)] = f(l);
    return T;
}

}  // namespace detail

/// Precomputes the five drift structures of L_n Y^n(H) in O(n^2).
inline DriftWeights drift_weights(const LatticeTable& H, const KernelParams& p, const ReservoirRates& r,
                                  DynamicsVariant v = {}) {
    p.validate();
    if (H.n != p.n || r.n != p.n) throw std::invalid_argument("drift_weights: lattice size mismatch");
    const FieldScales s(p);
    const int n = p.n;
    const auto m = static_cast<std::size_t>(n - 1);
    DriftWeights d;
    d.n = n;
    d.w1.assign(m, 0.0);
    d.w2.assign(m, 0.0);
    d.w3.assign(m, 0.0);
    d.w5.assign(m, 0.0);
    const double c1 = 2.0 * s.n2 / s.sqrt_n;
    const double c3 = v.asymmetric ? s.ntheta / s.sqrt_n : 0.0;
    for (int x = 1; x <= n - 1; ++x) {
        const auto i = static_cast<std::size_t>(x - 1);
        double a1 = 0.0, a3 = 0.0;
        for (int y = 1; y <= n - 1; ++y) {
            if (y == x) continue;
            const double dh = H.at(y) - H.at(x);
            a1 += sym_rate(x - y, p.alpha) * dh;
            a3 += asym_rate_sym_part(y - x, p.gamma) * dh;
        }
        d.w1[i] = c1 * a1;
        d.w3[i] = c3 * a3;
        d.w2[i] = -s.n2 / s.sqrt_n * r.alpha_at(x) * H.at(x);
        d.w5[i] = -0.5 * c3 * r.gamma_at(x) * H.at(x);
    }
    // A^{n,4}: K_xy = T(y-x) (H_y - H_x), T(l) = -(n^theta / sqrt n) a_gamma(l)
    d.a4 = QuadraticForm(n);
    if (v.asymmetric) {
        const double sign = v.reversed ? -1.0 : 1.0;
        auto T = detail::toeplitz_table(n, [&](std::int64_t l) {
            return -sign * c3 * asym_rate_antisym_part(l, p.gamma);
        });
        std::vector<double> ones(m, 1.0), minus_h(m);
        for (std::size_t i = 0; i < m; ++i) minus_h[i] = -H.value[i];
        d.a4.add_toeplitz(std::move(T), {ones, minus_h}, {H.value, ones});
    }
    return d;
}

/// A^{n,j}(eta) for j in 1..5.
inline double drift_term(const Configuration& c, int j, const DriftWeights& d) {
    if (j < 1 || j > 5) throw std::invalid_argument("drift term index must be in 1..5");
    if (c.n() != d.n) throw std::invalid_argument("drift_term: lattice size mismatch");
    if (j == 4) return d.a4.evaluate(c);
    return linear_value(d.linear(j), c);
}

/// C_alpha H''(x/n) / sqrt(n): weights of C_alpha Y^n(Delta H).
inline std::vector<double> laplacian_weights(const LatticeTable& H, double calpha) {
    const double s = calpha / std::sqrt(static_cast<double>(H.n));
    std::vector<double> w(H.d2.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = s * H.d2[i];
    return w;
}

/// L_n Y^2 - 2 Y L_n Y as a quadratic form in eta_bar.
inline QuadraticForm qv_form(const LatticeTable& H, const KernelParams& p, const ReservoirRates& r,
                             DynamicsVariant v = {}) {
    p.validate();
    const int n = p.n;
    const auto m = static_cast<std::size_t>(n - 1);
    const double nn = n;
    const double ca = v.asymmetric ? std::pow(nn, p.theta - 1.0) : 0.0;
    QuadraticForm q(n);
    double constant = 0.0;
    std::vector<double> b(m, 0.0);
    for (int x = 1; x <= n - 1; ++x) {
        const auto i = static_cast<std::size_t>(x - 1);
        const double h2 = H.at(x) * H.at(x);
        for (int y = 1; y <= n - 1; ++y) {
            if (y == x) continue;
            const double dh2 = (H.at(y) - H.at(x)) * (H.at(y) - H.at(x));
            // symmetric swaps: (eta_x - eta_y)^2 = 1/2 - 2 eta_bar_x eta_bar_y
            constant += 0.5 * nn * sym_rate(x - y, p.alpha) * dh2;
            if (y > x && ca != 0.0) {
                // eta_from (1 - eta_to) = 1/4 + eta_bar_from/2 - eta_bar_to/2 - eta_bar_x eta_bar_y
                const double c = ca * asym_rate(y - x, p.gamma) * dh2;
                const auto j = static_cast<std::size_t>(y - 1);
                constant += 0.25 * c;
                const auto from = v.reversed ? j : i;
                const auto to = v.reversed ? i : j;
                b[from] += 0.5 * c;
                b[to] -= 0.5 * c;
            }
        }
        constant += 0.5 * nn * r.alpha_at(x) * h2;
        if (ca != 0.0) {
            const double in_rate = v.reversed ? r.right_at(x) : r.left_at(x);
            const double out_rate = v.reversed ? r.left_at(x) : r.right_at(x);
            // creation needs eta_x = 0: 1/2 - eta_bar_x; annihilation: 1/2 + eta_bar_x
            constant += 0.25 * ca * (in_rate + out_rate) * h2;
            b[i] += 0.5 * ca * (out_rate - in_rate) * h2;
        }
    }
    q.add_constant(constant);
    q.add_linear(b);
    // K_xy = T(y-x) (H_y - H_x)^2 = T(y-x) [H_y^2 - 2 H_x H_y + H_x^2]
    auto T = detail::toeplitz_table(n, [&](std::int64_t l) {
        const std::int64_t a = l < 0 ? -l : l;
        return -2.0 * nn * sym_rate(l, p.alpha) - 0.5 * ca * asym_rate(a, p.gamma);
    });
    std::vector<double> ones(m, 1.0), h2(m), m2h(m);
    for (std::size_t i = 0; i < m; ++i) {
        h2[i] = H.value[i] * H.value[i];
        m2h[i] = -2.0 * H.value[i];
    }
    q.add_toeplitz(std::move(T), {ones, m2h, h2}, {h2, H.value, ones});
    return q;
}

/// Closed-form nu_{1/2} mean of the symmetric-bulk part of the QV integrand:
/// (n/2) sum_{x != y} s_alpha(x-y) (H_y - H_x)^2.
inline double qv_symmetric_bulk_mean(const LatticeTable& H, double alpha) {
    double s = 0.0;
    for (int x = 1; x <= H.n - 1; ++x)
        for (int y = 1; y <= H.n - 1; ++y)
            if (x != y) s += sym_rate(x - y, alpha) * (H.at(y) - H.at(x)) * (H.at(y) - H.at(x));
    return 0.5 * H.n * s;
}

/// Block length floor(eps n) used wherever the continuum writes eps n.
inline int block_length(double eps, int n) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("block length: requires 0 < ε < 1");
    return static_cast<int>(std::floor(eps * n));
}

namespace detail {

// sum_x c_x 1{i, j in W(x)} over the boundary-anchored windows of length L,
// optionally dropping the diagonal.
inline QuadraticForm window_pair_form(int n, int L, const std::vector<double>& cx, bool diagonal) {
    const int m = n - 1;
    if (L < 1 || 2 * L > n) throw std::invalid_argument("window length floor(εn) must satisfy 1 <= L <= n/2");
    std::vector<double> dense(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
    for (int x = 1; x <= m; ++x) {
        const Window w = block_window(n, x, L, Anchor::Boundary);
        const double c = cx[static_cast<std::size_t>(x - 1)];
        for (int i = w.first; i <= w.last; ++i)
            for (int j = w.first; j <= w.last; ++j)
                if (diagonal || i != j)
                    dense[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(m) +
                          static_cast<std::size_t>(j - 1)] += c;
    }
    QuadraticForm q(n);
    q.add_banded(L, [&](int x, int y) {
        return dense[static_cast<std::size_t>(x - 1) * static_cast<std::size_t>(m) + static_cast<std::size_t>(y - 1)];
    });
    return q;
}

}  // namespace detail

/// X_eps = sum_x H'(x/n) {(eta_bar^L_x)^2 - 1/(4L)} with L = floor(eps n) and
/// boundary-anchored windows; written as (1/L^2) sum_{i != j in W(x)} eta_bar_i eta_bar_j.
inline QuadraticForm block_square_form(const LatticeTable& H, double eps) {
    const int L = block_length(eps, H.n);
    if (L < 2) throw std::invalid_argument("comparator window floor(εn) must be >= 2");
    std::vector<double> cx(H.d1.size());
    for (std::size_t i = 0; i < cx.size(); ++i) cx[i] = H.d1[i] / (static_cast<double>(L) * L);
    return detail::window_pair_form(H.n, L, cx, false);
}

/// The bracket (eta_bar^L_x)^2 - 1/(4L) evaluated directly.
inline double block_bracket(const Configuration& c, int x, int L) {
    const double e = block_average(c, x, L, Anchor::Boundary) - 0.5;
    return e * e - 0.25 / L;
}

/// Second-order Boltzmann-Gibbs comparator A^{n,4} + m n^{theta - 3/2} X_eps.
inline QuadraticForm bg_comparator_form(const LatticeTable& H, const KernelParams& p, const DriftWeights& d,
                                        double eps, double tol = 1e-12) {
    const double m = tail_sum(1, p.gamma, tol);
    QuadraticForm q = d.a4;
    QuadraticForm x = block_square_form(H, eps);
    x.scale(m * std::pow(static_cast<double>(p.n), p.theta - 1.5));
    q += x;
    return q;
}

/// Energy integrand -sum_x (eta_bar^L_x)^2 H'(x/n), the Riemann sum of
/// -int (Y(iota_{eps,u}))^2 H'(u) du with Y(iota_{eps,x/n}) = sqrt(n) eta_bar^L_x.
inline QuadraticForm energy_form(const LatticeTable& H, double eps) {
    const int L = block_length(eps, H.n);
    std::vector<double> cx(H.d1.size());
    for (std::size_t i = 0; i < cx.size(); ++i) cx[i] = -H.d1[i] / (static_cast<double>(L) * L);
    return detail::window_pair_form(H.n, L, cx, true);
}

/// Weights of Y^n(iota_{eps,u}).
inline std::vector<double> boundary_weights(int n, double eps, int u) { return iota(eps, u).lattice_weights(n); }

// ---------------------------------------------------------------------------
// Channel registration and record post-processing

inline std::string channel_name(const std::string& kind, const std::string& label) { return kind + ":" + label; }

inline std::string eps_label(const std::string& base, double eps) {
    std::ostringstream os;
    os << base << "@eps=" << eps;
    return os.str();
}

/// Registers Y, A1..A5 for H under `label`.
inline void add_martingale_channels(Observables& obs, const std::string& label, const LatticeTable& H,
                                    const DriftWeights& d) {
    obs.add_linear(channel_name("Y", label), fluctuation_weights(H));
    obs.add_linear(channel_name("A1", label), d.w1);
    obs.add_linear(channel_name("A2", label), d.w2);
    obs.add_linear(channel_name("A3", label), d.w3);
    obs.add_linear(channel_name("A5", label), d.w5);
    obs.add_quadratic(channel_name("A4", label), d.a4);
}

/// M^n(H) at the sample times: Y_t - Y_0 - sum_j int_0^t A^{n,j}.
inline std::vector<double> martingale_path(const TrajectoryRecord& rec, const std::string& label) {
    const char* kinds[] = {"A1", "A2", "A3", "A4", "A5"};
    std::vector<std::size_t> idx;
    for (const char* k : kinds) {
        const auto name = channel_name(k, label);
        if (!rec.has_channel(name)) throw std::invalid_argument("martingale_path: missing accumulator " + name);
        idx.push_back(rec.channel(name));
    }
    const auto y = rec.channel(channel_name("Y", label));
    std::vector<double> m(rec.times.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
        double drift = 0.0;
        for (auto j : idx) drift += rec.integral[j][k];
        m[k] = rec.value[y][k] - rec.value[y][0] - drift;
    }
    return m;
}

/// <M^n(H)>_t at the sample times; requires a "QV:label" channel.
inline std::vector<double> qv_path(const TrajectoryRecord& rec, const std::string& label) {
    const auto name = channel_name("QV", label);
    if (!rec.has_channel(name)) throw std::invalid_argument("qv_path: missing accumulator " + name);
    return rec.integral[rec.channel(name)];
}

/// Integral of a channel over [0, T].
inline double channel_integral(const TrajectoryRecord& rec, const std::string& name) {
    return rec.integral[rec.channel(name)].back();
}

/// Integral of a channel over [times[a], times[b]].
inline double channel_integral(const TrajectoryRecord& rec, const std::string& name, std::size_t a, std::size_t b) {
    const auto& I = rec.integral[rec.channel(name)];
    return I.at(b) - I.at(a);
}

/// sup over [0, T] of (int_0^t V)^2 for a channel registered with sup tracking.
inline double channel_sup_square(const TrajectoryRecord& rec, const std::string& name) {
    return rec.sup_integral_sq[rec.channel(name)];
}

}  // namespace lrex
