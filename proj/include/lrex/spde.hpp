#pragma once

// Spectral solvers for the limiting equations on [0, 1] with Dirichlet
// boundary conditions, in the basis e_k(u) = sqrt(2) sin(k pi u).
//
// OU:      dy_k = -A (k pi)^2 y_k dt + sqrt(D) (k pi) dB_k, sampled exactly.
// Burgers: exponential Euler with the nonlinearity B grad(Y_eps^2) where
//          Y_eps(u) = Y(iota_{eps,u}) is the windowed field.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "lrex/kernels.hpp"
#include "lrex/random.hpp"
#include "lrex/testfns.hpp"

namespace lrex {

struct SpdeConstants {
    double A = 1.0;
    double B = 0.0;
    double D = 0.5;

    static SpdeConstants from(const LimitConstants& c) { return {c.A, c.B, c.D}; }
    double stationary_variance() const { return D / (2.0 * A); }
};

struct SpectralState {
    int K = 0;
    SpdeConstants c;
    std::vector<double> y;  // y[k-1] for mode k
    double t = 0.0;

    SpectralState() = default;
    SpectralState(int modes, SpdeConstants consts) : K(modes), c(consts), y(static_cast<std::size_t>(modes), 0.0) {
        if (modes < 1) throw std::invalid_argument("SpectralState: need at least one mode");
        if (!(consts.A > 0.0 && consts.D > 0.0)) throw std::invalid_argument("SpectralState: requires A, D > 0");
    }

    double mode_rate(int k) const {
        const double w = k * std::numbers::pi;
        return c.A * w * w;
    }
};

inline double basis(int k, double u) { return std::numbers::sqrt2 * std::sin(k * std::numbers::pi * u); }
inline double basis_d1(int k, double u) {
    const double w = k * std::numbers::pi;
    return std::numbers::sqrt2 * w * std::cos(w * u);
}

/// Modes i.i.d. N(0, D/(2A)).
inline SpectralState stationary_state(int K, SpdeConstants c, Stream& rng) {
    SpectralState s(K, c);
    const double sd = std::sqrt(c.stationary_variance());
    for (double& v : s.y) v = sd * rng.normal();
    return s;
}

/// Variance of the exact transition over dt: (D/(2A)) (1 - e^{-2 A (k pi)^2 dt}).
inline double ou_transition_variance(const SpectralState& s, int k, double dt) {
    return -s.c.stationary_variance() * std::expm1(-2.0 * s.mode_rate(k) * dt);
}

/// Exact OU transition. A null stream switches the noise off.
inline void ou_step(SpectralState& s, double dt, Stream* rng) {
    if (dt < 0.0) throw std::invalid_argument("ou_step: dt must be >= 0");
    if (dt == 0.0) return;
    for (int k = 1; k <= s.K; ++k) {
        double& y = s.y[static_cast<std::size_t>(k - 1)];
        y *= std::exp(-s.mode_rate(k) * dt);
        if (rng) y += std::sqrt(ou_transition_variance(s, k, dt)) * rng->normal();
    }
    s.t += dt;
}

inline void ou_step(SpectralState& s, double dt, Stream& rng) { ou_step(s, dt, &rng); }

/// Exact OU transition sampled jointly with int_t^{t+dt} y_k ds; adds the
/// integrals to `integral`. Uses two normals per mode.
inline void ou_step_integrated(SpectralState& s, double dt, Stream& rng, std::vector<double>& integral) {
    if (!(dt > 0.0)) throw std::invalid_argument("ou_step_integrated: dt must be positive");
    integral.resize(s.y.size(), 0.0);
    const double v = s.c.stationary_variance();
    for (int k = 1; k <= s.K; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        const double lam = s.mode_rate(k);
        const double x = lam * dt;
        const double one_minus_a = -std::expm1(-x);
        // x - 2(1 - e^{-x}) + (1 - e^{-2x})/2, by series when it cancels
        const double f = x < 1e-2 ? x * x * x * (1.0 / 3.0 - x / 4.0 + 7.0 * x * x / 60.0)
                                  : x - 2.0 * one_minus_a - 0.5 * std::expm1(-2.0 * x);
        const double var_y = v * one_minus_a * (2.0 - one_minus_a);
        const double var_i = 2.0 * v * f / (lam * lam);
        const double cov = v * one_minus_a * one_minus_a / lam;
        const double z1 = rng.normal(), z2 = rng.normal();
        const double y0 = s.y[i];
        const double dy = std::sqrt(var_y) * z1;
        s.y[i] = (1.0 - one_minus_a) * y0 + dy;
        const double resid = std::max(0.0, var_i - cov * cov / var_y);
        integral[i] += one_minus_a / lam * y0 + cov / var_y * dy + std::sqrt(resid) * z2;
    }
    s.t += dt;
}

// ---------------------------------------------------------------------------
// Windowed field Y(iota_{eps,u}) on a quadrature grid over u

/// <e_k, iota_{eps,u}>: the window is [u, u+eps) for u < 1-eps and [u-eps, u) otherwise.
inline double iota_mode(int k, double eps, double u) {
    const double a = u < 1.0 - eps ? u : u - eps;
    const double w = k * std::numbers::pi;
    return std::numbers::sqrt2 * (std::cos(w * a) - std::cos(w * (a + eps))) / (eps * w);
}

/// Y(iota_{eps,u}) for the state.
inline double windowed_field(const SpectralState& s, double eps, double u) {
    double v = 0.0;
    for (int k = 1; k <= s.K; ++k) v += s.y[static_cast<std::size_t>(k - 1)] * iota_mode(k, eps, u);
    return v;
}

/// Composite 8-point Gauss-Legendre grid over [0, 1] with a panel break at
/// 1 - eps, where the window switches sides. G(q, k) = <e_k, iota_{eps,u_q}>.
class WindowGrid {
public:
    WindowGrid(int K, double eps, int panels) : K_(K), eps_(eps) {
        if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("WindowGrid: requires 0 < ε < 1");
        if (panels < 2) throw std::invalid_argument("WindowGrid: need at least two panels");
        using GL = boost::math::quadrature::gauss<double, 8>;
        const double brk = 1.0 - eps;
        const int left = std::max(1, static_cast<int>(std::lround(panels * brk)));
        const int right = std::max(1, panels - left);
        auto add = [&](double a, double b, int m) {
            const double h = (b - a) / m;
            for (int p = 0; p < m; ++p) {
                const double mid = a + (p + 0.5) * h;
                for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
                    const double x = GL::abscissa()[i];
                    const double w = GL::weights()[i] * 0.5 * h;
                    if (x == 0.0) {
                        push(mid, w);
                    } else {
                        push(mid - 0.5 * h * x, w);
                        push(mid + 0.5 * h * x, w);
                    }
                }
            }
        };
        add(0.0, brk, left);
        add(brk, 1.0, right);
        g_.resize(u_.size() * static_cast<std::size_t>(K));
        for (std::size_t q = 0; q < u_.size(); ++q)
            for (int k = 1; k <= K; ++k) g_[q * static_cast<std::size_t>(K) + static_cast<std::size_t>(k - 1)] =
                iota_mode(k, eps, u_[q]);
    }

    int modes() const { return K_; }
    double eps() const { return eps_; }
    std::size_t nodes() const { return u_.size(); }
    double node(std::size_t q) const { return u_[q]; }
    double weight(std::size_t q) const { return w_[q]; }
    double g(std::size_t q, int k) const { return g_[q * static_cast<std::size_t>(K_) + static_cast<std::size_t>(k - 1)]; }

    /// Y_eps at every node.
    std::vector<double> field(const SpectralState& s) const {
        if (s.K != K_) throw std::invalid_argument("WindowGrid: mode count mismatch");
        std::vector<double> f(u_.size(), 0.0);
        const auto K = static_cast<std::size_t>(K_);
        for (std::size_t q = 0; q < u_.size(); ++q) {
            const double* row = g_.data() + q * K;
            double v = 0.0;
            for (std::size_t k = 0; k < K; ++k) v += row[k] * s.y[k];
            f[q] = v;
        }
        return f;
    }

private:
    void push(double u, double w) {
        u_.push_back(u);
        w_.push_back(w);
    }

    int K_;
    double eps_;
    std::vector<double> u_, w_, g_;
};

/// The Burgers nonlinearity projected on the modes:
/// N_k(y) = -B int_0^1 (Y_eps(u)^2 - c(u)) e_k'(u) du, with c(u) the
/// stationary mean of Y_eps(u)^2 under the truncated OU law.
class BurgersOperator {
public:
    BurgersOperator(int K, double eps, SpdeConstants c, int panels = 0)
        : grid_(K, check_eps(K, eps), panels > 0 ? panels : 4 * K), c_(c) {
        const std::size_t Q = grid_.nodes();
        center_.assign(Q, 0.0);
        d1_.resize(Q * static_cast<std::size_t>(K));
        const double v = c.stationary_variance();
        for (std::size_t q = 0; q < Q; ++q) {
            for (int k = 1; k <= K; ++k) {
                center_[q] += v * grid_.g(q, k) * grid_.g(q, k);
                d1_[q * static_cast<std::size_t>(K) + static_cast<std::size_t>(k - 1)] =
                    grid_.weight(q) * basis_d1(k, grid_.node(q));
            }
        }
    }

    const WindowGrid& grid() const { return grid_; }
    double centering(std::size_t q) const { return center_[q]; }

    std::vector<double> drift(const SpectralState& s) const {
        const auto K = static_cast<std::size_t>(grid_.modes());
        std::vector<double> out(K, 0.0);
        const auto f = grid_.field(s);
        for (std::size_t q = 0; q < f.size(); ++q) {
            const double sq = f[q] * f[q] - center_[q];
            const double* row = d1_.data() + q * K;
            for (std::size_t k = 0; k < K; ++k) out[k] += sq * row[k];
        }
        for (double& v : out) v *= -c_.B;
        return out;
    }

    /// Largest dt the scheme accepts: 1 / (A (K pi)^2).
    double max_dt() const {
        const double w = grid_.modes() * std::numbers::pi;
        return 1.0 / (c_.A * w * w);
    }

private:
    static double check_eps(int K, double eps) {
        if (eps < 2.0 / K) throw std::invalid_argument("BurgersOperator: mollification width must be >= 2/K");
        return eps;
    }

    WindowGrid grid_;
    SpdeConstants c_;
    std::vector<double> center_, d1_;
};

/// Exponential Euler: y_k <- a_k y_k + (1 - a_k)/lambda_k N_k(y) + OU noise.
/// With B = 0 this is ou_step on the same stream.
inline void burgers_step(SpectralState& s, double dt, const BurgersOperator& op, Stream* rng) {
    if (s.c.B == 0.0) {
        ou_step(s, dt, rng);
        return;
    }
    if (dt > op.max_dt() * (1.0 + 1e-12))
        throw std::invalid_argument("burgers_step: dt exceeds the cap 1/(A (K π)^2) = " + std::to_string(op.max_dt()));
    if (dt <= 0.0) throw std::invalid_argument("burgers_step: dt must be positive");
    const auto N = op.drift(s);
    for (int k = 1; k <= s.K; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        const double lam = s.mode_rate(k);
        const double a = std::exp(-lam * dt);
        s.y[i] = a * s.y[i] - std::expm1(-lam * dt) / lam * N[i];
        if (rng) s.y[i] += std::sqrt(ou_transition_variance(s, k, dt)) * rng->normal();
    }
    s.t += dt;
}

inline void burgers_step(SpectralState& s, double dt, const BurgersOperator& op, Stream& rng) {
    burgers_step(s, dt, op, &rng);
}

// ---------------------------------------------------------------------------
// Paths and functionals

struct SpectralExpansion {
    std::vector<double> h;  // h[k-1] = <H, e_k>
    double truncation_error = 0.0;  // ||H||^2 - sum h_k^2, relative to ||H||^2

    double pair(const SpectralState& s) const {
        double v = 0.0;
        for (std::size_t i = 0; i < h.size() && i < s.y.size(); ++i) v += h[i] * s.y[i];
        return v;
    }
    /// ||grad H||^2 of the truncated expansion.
    double grad_norm_sq() const {
        double v = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double w = (static_cast<double>(i) + 1.0) * std::numbers::pi;
            v += w * w * h[i] * h[i];
        }
        return v;
    }
    /// Y(Delta H) = -sum (k pi)^2 h_k y_k.
    double laplacian_pair(const SpectralState& s) const {
        double v = 0.0;
        for (std::size_t i = 0; i < h.size() && i < s.y.size(); ++i) {
            const double w = (static_cast<double>(i) + 1.0) * std::numbers::pi;
            v -= w * w * h[i] * s.y[i];
        }
        return v;
    }
};

/// Projects H on the first K modes; throws when the Parseval defect exceeds tol.
inline SpectralExpansion expand(const TestFunction& H, int K, double tol = 1e-6) {
    SpectralExpansion e;
    double captured = 0.0;
    for (int k = 1; k <= K; ++k) {
        const double c = quad::simpson([&](double u) { return H(u) * basis(k, u); }, 0.0, 1.0);
        e.h.push_back(c);
        captured += c * c;
    }
    const double total = H.l2_norm_sq();
    e.truncation_error = total > 0.0 ? std::abs(total - captured) / total : 0.0;
    if (e.truncation_error > tol)
        throw std::runtime_error("expand: truncation error " + std::to_string(e.truncation_error) + " for " +
                                 H.name() + " exceeds " + std::to_string(tol));
    return e;
}

struct SpectralPath {
    std::vector<double> times;
    std::vector<std::vector<double>> y;  // [sample][mode]
    /// [sample][mode]: exact integral over the interval ending at the sample;
    /// empty unless the path was run with integrals
    std::vector<std::vector<double>> integral;

    bool has_integrals() const { return !integral.empty(); }
};

/// Runs `steps` OU (or Burgers, when op is given) steps of size dt and keeps
/// every `record_every`-th state, including the initial one. With
/// `integrals` the OU path also carries exact mode integrals.
inline SpectralPath simulate_path(SpectralState s, double dt, int steps, Stream& rng, int record_every = 1,
                                  const BurgersOperator* op = nullptr, bool integrals = false) {
    if (record_every < 1) throw std::invalid_argument("simulate_path: record_every must be >= 1");
    if (integrals && op) throw std::invalid_argument("simulate_path: exact integrals are available for OU only");
    SpectralPath p;
    p.times.push_back(s.t);
    p.y.push_back(s.y);
    std::vector<double> acc(s.y.size(), 0.0);
    if (integrals) p.integral.push_back(acc);
    for (int i = 1; i <= steps; ++i) {
        if (op)
            burgers_step(s, dt, *op, &rng);
        else if (integrals)
            ou_step_integrated(s, dt, rng, acc);
        else
            ou_step(s, dt, &rng);
        if (i % record_every == 0) {
            p.times.push_back(s.t);
            p.y.push_back(s.y);
            if (integrals) {
                p.integral.push_back(acc);
                std::fill(acc.begin(), acc.end(), 0.0);
            }
        }
    }
    return p;
}

namespace detail {

inline SpectralState state_of(const SpectralPath& p, std::size_t i, SpdeConstants c) {
    SpectralState s(static_cast<int>(p.y[i].size()), c);
    s.y = p.y[i];
    s.t = p.times[i];
    return s;
}

}  // namespace detail

/// int over sample interval i of sum_k w_k y_k: exact when the path carries
/// integrals, trapezoidal otherwise.
inline double interval_integral(const SpectralPath& p, std::size_t i, const std::vector<double>& w) {
    auto pair = [&](const std::vector<double>& y) {
        double v = 0.0;
        for (std::size_t k = 0; k < w.size() && k < y.size(); ++k) v += w[k] * y[k];
        return v;
    };
    if (p.has_integrals()) return pair(p.integral[i]);
    return 0.5 * (pair(p.y[i - 1]) + pair(p.y[i])) * (p.times[i] - p.times[i - 1]);
}

/// M_t(H) = Y_t(H) - Y_0(H) - A int_0^t Y_s(Delta H) ds on the path grid.
inline std::vector<double> ou_martingale(const SpectralPath& p, const SpectralExpansion& H, SpdeConstants c) {
    std::vector<double> m(p.times.size(), 0.0), lap(H.h.size());
    for (std::size_t k = 0; k < lap.size(); ++k) {
        const double w = (static_cast<double>(k) + 1.0) * std::numbers::pi;
        lap[k] = -w * w * H.h[k];
    }
    const double y0 = H.pair(detail::state_of(p, 0, c));
    double integral = 0.0;
    for (std::size_t i = 1; i < m.size(); ++i) {
        integral += interval_integral(p, i, lap);
        m[i] = H.pair(detail::state_of(p, i, c)) - y0 - c.A * integral;
    }
    return m;
}

/// sup over the grid of (int_0^t Y(iota_{eps,u}) ds)^2.
inline double spde_boundary_functional(const SpectralPath& p, double eps, int u, SpdeConstants) {
    const double at = u == 0 ? 0.0 : 1.0;
    std::vector<double> g(p.y.front().size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = iota_mode(static_cast<int>(k) + 1, eps, at);
    double integral = 0.0, sup = 0.0;
    for (std::size_t i = 1; i < p.times.size(); ++i) {
        integral += interval_integral(p, i, g);
        sup = std::max(sup, integral * integral);
    }
    return sup;
}

/// A^eps_{s,t}(H) = -int_s^t int_0^1 Y_r(iota_{eps,u})^2 H'(u) du dr between
/// path samples a <= b.
inline double spde_energy_functional(const SpectralPath& p, const WindowGrid& grid, const TestFunction& H,
                                     std::size_t a, std::size_t b, SpdeConstants c) {
    if (a > b || b >= p.times.size()) throw std::invalid_argument("spde_energy_functional: bad sample range");
    std::vector<double> hw(grid.nodes());
    for (std::size_t q = 0; q < hw.size(); ++q) hw[q] = grid.weight(q) * H.derivative(grid.node(q), 1);
    auto slice = [&](std::size_t i) {
        const auto f = grid.field(detail::state_of(p, i, c));
        double v = 0.0;
        for (std::size_t q = 0; q < f.size(); ++q) v += f[q] * f[q] * hw[q];
        return -v;
    };
    double total = 0.0, prev = slice(a);
    for (std::size_t i = a + 1; i <= b; ++i) {
        const double cur = slice(i);
        total += 0.5 * (prev + cur) * (p.times[i] - p.times[i - 1]);
        prev = cur;
    }
    return total;
}

struct OuMartingaleReport {
    double expected_rate = 0.0;  // D ||grad H||^2
    double mean_increment = 0.0;
    double mean_increment_se = 0.0;
    double variance_rate = 0.0;  // sum of squared increments per unit time
    double variance_rate_se = 0.0;
    double lag1_correlation = 0.0;  // between consecutive increments
    std::size_t increments = 0;
};

/// Empirical check of the martingale characterization on a set of OU paths.
inline OuMartingaleReport ou_martingale_check(const std::vector<SpectralPath>& paths, const SpectralExpansion& H,
                                              SpdeConstants c) {
    OuMartingaleReport r;
    r.expected_rate = c.D * H.grad_norm_sq();
    double sum = 0.0, sum2 = 0.0, rate = 0.0, rate2 = 0.0, cross = 0.0;
    std::size_t pairs = 0, npaths = 0;
    for (const auto& p : paths) {
        const auto m = ou_martingale(p, H, c);
        if (m.size() < 2) continue;
        double q = 0.0, last = 0.0;
        for (std::size_t i = 1; i < m.size(); ++i) {
            const double d = m[i] - m[i - 1];
            sum += d;
            sum2 += d * d;
            q += d * d;
            if (i > 1) {
                cross += d * last;
                ++pairs;
            }
            last = d;
            ++r.increments;
        }
        const double T = p.times.back() - p.times.front();
        rate += q / T;
        rate2 += (q / T) * (q / T);
        ++npaths;
    }
    if (r.increments < 2 || npaths < 2) throw std::invalid_argument("ou_martingale_check: not enough increments");
    const double N = static_cast<double>(r.increments);
    r.mean_increment = sum / N;
    const double var = sum2 / N - r.mean_increment * r.mean_increment;
    r.mean_increment_se = std::sqrt(var / N);
    const double P = static_cast<double>(npaths);
    r.variance_rate = rate / P;
    r.variance_rate_se = std::sqrt(std::max(0.0, rate2 / P - r.variance_rate * r.variance_rate) / (P - 1.0));
    r.lag1_correlation = pairs ? (cross / static_cast<double>(pairs)) / var : 0.0;
    return r;
}

}  // namespace lrex
