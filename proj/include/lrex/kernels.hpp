#pragma once

// Jump kernels of the long-range exclusion process, reservoir rates and the
// limiting constants of the fluctuation theorem.
//
// All rates here are pre-acceleration: the n^2 and n^theta time scalings
// are applied by the event engine.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lrex {

/// Model parameters. Valid parameters satisfy alpha > 2, theta < min(gamma, 2)
/// and n >= 3.
struct KernelParams {
    double alpha = 3.0;
    double gamma = 2.5;
    double theta = 1.0;
    int n = 64;

    void validate() const {
        if (!(alpha > 2.0)) {
            std::ostringstream os;
            os << "alpha=" << alpha << " violates α > 2";
            throw std::invalid_argument(os.str());
        }
        if (!(gamma > 0.0)) {
            std::ostringstream os;
            os << "gamma=" << gamma << " must be positive";
            throw std::invalid_argument(os.str());
        }
        if (!(theta < std::min(gamma, 2.0))) {
            std::ostringstream os;
            os << "theta=" << theta << ", gamma=" << gamma << " violates θ < γ ∧ 2";
            throw std::invalid_argument(os.str());
        }
        if (n < 3) {
            throw std::invalid_argument("lattice size n must be >= 3");
        }
    }
};

/// s_alpha(l) = |l|^{-1-alpha} for l != 0.
inline double sym_rate(std::int64_t l, double alpha) {
    if (l == 0) return 0.0;
    return std::pow(static_cast<double>(l < 0 ? -l : l), -1.0 - alpha);
}

/// p_gamma(l) = l^{-1-gamma} for l > 0.
inline double asym_rate(std::int64_t l, double gamma) {
    if (l <= 0) return 0.0;
    return std::pow(static_cast<double>(l), -1.0 - gamma);
}

/// Symmetric part s_gamma(l) = (p(l) + p(-l)) / 2.
inline double asym_rate_sym_part(std::int64_t l, double gamma) {
    return 0.5 * (asym_rate(l, gamma) + asym_rate(-l, gamma));
}

/// Antisymmetric part a_gamma(l) = (p(l) - p(-l)) / 2.
inline double asym_rate_antisym_part(std::int64_t l, double gamma) {
    return 0.5 * (asym_rate(l, gamma) - asym_rate(-l, gamma));
}

namespace detail {

// Tail of sum_{k >= N} k^{-s} by Euler-Maclaurin with four Bernoulli
// corrections. `bound` receives twice the first omitted term, which dominates
// the remainder because every derivative of k^{-s} has constant sign.
inline double euler_maclaurin_tail(double N, double s, double* bound) {
    static constexpr std::array<double, 5> kBernoulliOverFactorial = {
        1.0 / 6.0 / 2.0,                 // B2 / 2!
        -1.0 / 30.0 / 24.0,              // B4 / 4!
        1.0 / 42.0 / 720.0,              // B6 / 6!
        -1.0 / 30.0 / 40320.0,           // B8 / 8!
        5.0 / 66.0 / 3628800.0,          // B10 / 10!
    };
    double tail = std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s);
    // rising factorial (s)_{2j-1} and power N^{-s-2j+1}
    double rising = s;
    double power = std::pow(N, -s - 1.0);
    for (std::size_t j = 0; j < 4; ++j) {
        tail += kBernoulliOverFactorial[j] * rising * power;
        rising *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
        power /= N * N;
    }
    if (bound) *bound = 2.0 * std::abs(kBernoulliOverFactorial[4] * rising * power);
    return tail;
}

}  // namespace detail

/// sum_{k >= K} k^{-s} to absolute accuracy tol.
inline double tail_sum(std::int64_t K, double s, double tol = 1e-12) {
    if (!(s > 1.0)) throw std::domain_error("tail_sum: exponent s must exceed 1 (series diverges)");
    if (!(tol > 0.0)) throw std::domain_error("tail_sum: tol must be positive");
    if (K < 1) throw std::domain_error("tail_sum: start index must be >= 1");

    std::int64_t N = std::max<std::int64_t>(K, 64);
    double bound = 0.0;
    double tail = detail::euler_maclaurin_tail(static_cast<double>(N), s, &bound);
    while (bound > 0.5 * tol) {
        N *= 2;
        tail = detail::euler_maclaurin_tail(static_cast<double>(N), s, &bound);
    }
    // explicit terms K..N-1, smallest first
    double head = 0.0;
    for (std::int64_t k = N - 1; k >= K; --k) head += std::pow(static_cast<double>(k), -s);
    return head + tail;
}

struct LimitConstants {
    double A = 0.0;  // diffusion coefficient, equals C_alpha
    double B = 0.0;  // Burgers coefficient
    double D = 0.0;  // noise strength
    double m = 0.0;  // first moment of p_gamma, equals B
};

/// A = 2 sum y^{1-alpha}, D = A / 2, m = B = sum y^{-gamma}.
inline LimitConstants limit_constants(double alpha, double gamma, double tol = 1e-12) {
    if (!(alpha > 2.0)) throw std::domain_error("limit_constants: requires α > 2");
    if (!(gamma > 1.0)) throw std::domain_error("limit_constants: requires γ > 1 (m diverges)");
    LimitConstants c;
    c.D = tail_sum(1, alpha - 1.0, tol);
    c.A = 2.0 * c.D;
    c.B = tail_sum(1, gamma, tol);
    c.m = c.B;
    return c;
}

inline LimitConstants limit_constants(const KernelParams& p, double tol = 1e-12) {
    return limit_constants(p.alpha, p.gamma, tol);
}

/// C_alpha = sum_{y != 0} |y|^{1-alpha}. Valid for every alpha > 2 regardless of gamma.
inline double c_alpha(double alpha, double tol = 1e-12) {
    if (!(alpha > 2.0)) throw std::domain_error("c_alpha: requires α > 2");
    return 2.0 * tail_sum(1, alpha - 1.0, tol);
}

/// Per-site reservoir rates on Lambda_n = {1..n-1}; index 0 holds site 1.
struct ReservoirRates {
    int n = 0;
    std::vector<double> r_alpha;        // sum_{y not in Lambda_n} s_alpha(x - y)
    std::vector<double> r_gamma_left;   // sum_{y <= 0} p_gamma(x - y)
    std::vector<double> r_gamma_right;  // sum_{y >= n} p_gamma(y - x)

    double alpha_at(int x) const { return r_alpha[static_cast<std::size_t>(x - 1)]; }
    double left_at(int x) const { return r_gamma_left[static_cast<std::size_t>(x - 1)]; }
    double right_at(int x) const { return r_gamma_right[static_cast<std::size_t>(x - 1)]; }
    double gamma_at(int x) const { return left_at(x) + right_at(x); }
};

inline ReservoirRates reservoir_rates(const KernelParams& p, double tol = 1e-12) {
    p.validate();
    ReservoirRates r;
    r.n = p.n;
    const auto sites = static_cast<std::size_t>(p.n - 1);
    r.r_alpha.resize(sites);
    r.r_gamma_left.resize(sites);
    r.r_gamma_right.resize(sites);
    // each entry is a sum of two tails; split the budget between them
    const double half = 0.5 * tol;
    std::vector<double> ta(sites + 1), tg(sites + 1);
    for (std::size_t k = 1; k <= sites; ++k) {
        ta[k] = tail_sum(static_cast<std::int64_t>(k), 1.0 + p.alpha, half);
        tg[k] = tail_sum(static_cast<std::int64_t>(k), 1.0 + p.gamma, half);
    }
    for (int x = 1; x <= p.n - 1; ++x) {
        const auto i = static_cast<std::size_t>(x - 1);
        const auto left = static_cast<std::size_t>(x);
        const auto right = static_cast<std::size_t>(p.n - x);
        r.r_alpha[i] = ta[left] + ta[right];
        r.r_gamma_left[i] = tg[left];
        r.r_gamma_right[i] = tg[right];
    }
    return r;
}

}  // namespace lrex
