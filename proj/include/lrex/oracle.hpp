#pragma once

// Dense generator of the process on tiny lattices, enumerated term by term
// from the definitions of L_s and L_a. Ground truth for the engine and for
// every expectation formula.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "lrex/configuration.hpp"
#include "lrex/kernels.hpp"

namespace lrex {

struct GeneratorOptions {
    bool include_symmetric = true;
    bool include_asymmetric = true;
    /// Adjoint asymmetric part: p_gamma(.) replaced by p_gamma(-.).
    bool reversed = false;
    double tol = 1e-14;
};

/// Q over the 2^{n-1} configurations; state index = occupancy bits with
/// site 1 least significant.
class GeneratorMatrix {
public:
    GeneratorMatrix() = default;
    explicit GeneratorMatrix(int n)
        : n_(n), states_(std::size_t{1} << (n - 1)), q_(states_ * states_, 0.0) {}

    int n() const { return n_; }
    std::size_t states() const { return states_; }
    double operator()(std::size_t i, std::size_t j) const { return q_[i * states_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return q_[i * states_ + j]; }

    /// Total exit rate of state i.
    double exit_rate(std::size_t i) const { return -(*this)(i, i); }

    double max_exit_rate() const {
        double m = 0.0;
        for (std::size_t i = 0; i < states_; ++i) m = std::max(m, exit_rate(i));
        return m;
    }

    GeneratorMatrix transpose() const {
        GeneratorMatrix t(n_);
        for (std::size_t i = 0; i < states_; ++i)
            for (std::size_t j = 0; j < states_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    int n_ = 0;
    std::size_t states_ = 0;
    std::vector<double> q_;
};

inline constexpr int kOracleMaxN = 10;

inline GeneratorMatrix build_generator(const KernelParams& p, const GeneratorOptions& opt = {}) {
    p.validate();
    if (p.n > kOracleMaxN)
        throw std::invalid_argument("build_generator: n=" + std::to_string(p.n) + " exceeds oracle limit " +
                                    std::to_string(kOracleMaxN));
    const int n = p.n;
    const double n2 = static_cast<double>(n) * n;
    const double nt = std::pow(static_cast<double>(n), p.theta);
    const ReservoirRates r = reservoir_rates(p, opt.tol);
    GeneratorMatrix Q(n);

    // forward p(y - x) for a jump x -> y; the adjoint uses p(x - y)
    auto jump = [&](int x, int y) {
        return opt.reversed ? asym_rate(x - y, p.gamma) : asym_rate(y - x, p.gamma);
    };

    for (std::size_t i = 0; i < Q.states(); ++i) {
        const Configuration eta = Configuration::from_index(n, i);
        auto add = [&](const Configuration& to, double rate) {
            const std::size_t j = to.index();
            if (j == i || rate == 0.0) return;
            Q(i, j) += rate;
            Q(i, i) -= rate;
        };
        for (int x = 1; x <= n - 1; ++x) {
            for (int y = 1; y <= n - 1; ++y) {
                if (x == y) continue;
                if (opt.include_symmetric) add(swap(eta, x, y), n2 * sym_rate(x - y, p.alpha));
                if (opt.include_asymmetric && eta.occupied(x) && !eta.occupied(y))
                    add(swap(eta, x, y), nt * jump(x, y));
            }
            if (opt.include_symmetric) add(flip(eta, x), 0.5 * n2 * r.alpha_at(x));
            if (opt.include_asymmetric) {
                // entries from the left reservoir (exits to the right under the adjoint)
                const double in_rate = opt.reversed ? r.right_at(x) : r.left_at(x);
                const double out_rate = opt.reversed ? r.left_at(x) : r.right_at(x);
                if (!eta.occupied(x)) add(flip(eta, x), 0.5 * nt * in_rate);
                if (eta.occupied(x)) add(flip(eta, x), 0.5 * nt * out_rate);
            }
        }
    }
    return Q;
}

/// ||nu Q||_inf for nu uniform on configurations (= nu_{1/2}).
inline double stationarity_residual(const GeneratorMatrix& Q, const std::vector<double>* nu = nullptr) {
    const std::size_t S = Q.states();
    std::vector<double> w(S, 1.0 / static_cast<double>(S));
    if (nu) w = *nu;
    double worst = 0.0;
    for (std::size_t j = 0; j < S; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < S; ++i) s += w[i] * Q(i, j);
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

/// max |nu_i q_ij - nu_j q_ji| under nu_{1/2} (or the given weights).
inline double detailed_balance_residual(const GeneratorMatrix& Q, const std::vector<double>* nu = nullptr) {
    const std::size_t S = Q.states();
    std::vector<double> w(S, 1.0 / static_cast<double>(S));
    if (nu) w = *nu;
    double worst = 0.0;
    for (std::size_t i = 0; i < S; ++i)
        for (std::size_t j = i + 1; j < S; ++j)
            worst = std::max(worst, std::abs(w[i] * Q(i, j) - w[j] * Q(j, i)));
    return worst;
}

/// Product Bernoulli(rho) weights over configurations.
inline std::vector<double> product_measure(int n, double rho) {
    const std::size_t S = std::size_t{1} << (n - 1);
    std::vector<double> w(S);
    for (std::size_t i = 0; i < S; ++i) {
        const int k = std::popcount(static_cast<std::uint64_t>(i));
        w[i] = std::pow(rho, k) * std::pow(1.0 - rho, n - 1 - k);
    }
    return w;
}

struct TransientResult {
    std::vector<double> distribution;
    double truncation_bound = 0.0;  // total Poisson mass not summed
    std::size_t terms = 0;
};

/// p0 exp(tQ) by uniformization. Poisson weights are formed in log space;
/// summation stops once the remaining Poisson mass is below `tail_tol`.
inline TransientResult transient_distribution(const GeneratorMatrix& Q, const std::vector<double>& p0, double t,
                                              double tail_tol = 1e-12) {
    if (t < 0.0) throw std::invalid_argument("transient_distribution: t must be >= 0");
    const std::size_t S = Q.states();
    if (p0.size() != S) throw std::invalid_argument("transient_distribution: p0 has wrong length");
    TransientResult res;
    if (t == 0.0) {
        res.distribution = p0;
        return res;
    }
    const double lambda = Q.max_exit_rate() * 1.0001 + 1e-300;
    const double mu = lambda * t;
    // P = I + Q / lambda, applied to row vectors
    std::vector<double> v = p0, next(S), acc(S, 0.0);
    double summed = 0.0;
    std::size_t k = 0;
    const std::size_t kmax = static_cast<std::size_t>(mu + 40.0 * std::sqrt(mu + 1.0) + 200.0);
    for (;; ++k) {
        const double logw = -mu + static_cast<double>(k) * std::log(mu) - std::lgamma(static_cast<double>(k) + 1.0);
        const double w = std::exp(logw);
        for (std::size_t j = 0; j < S; ++j) acc[j] += w * v[j];
        summed += w;
        if ((static_cast<double>(k) > mu && 1.0 - summed < tail_tol) || k >= kmax) break;
        for (std::size_t j = 0; j < S; ++j) {
            double s = v[j];
            for (std::size_t i = 0; i < S; ++i) s += v[i] * Q(i, j) / lambda;
            next[j] = s;
        }
        v.swap(next);
    }
    res.distribution = std::move(acc);
    res.truncation_bound = std::max(0.0, 1.0 - summed);
    res.terms = k + 1;
    return res;
}

/// sum_i w_i f(state i).
inline double exact_expectation(const std::vector<double>& weights, int n,
                                const std::function<double(const Configuration&)>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (weights[i] != 0.0) s += weights[i] * f(Configuration::from_index(n, i));
    return s;
}

/// Expectation under nu_{1/2}.
inline double exact_expectation(int n, const std::function<double(const Configuration&)>& f) {
    const std::size_t S = std::size_t{1} << (n - 1);
    return exact_expectation(std::vector<double>(S, 1.0 / static_cast<double>(S)), n, f);
}

/// (Q f)(i) for an observable tabulated over states.
inline std::vector<double> apply_generator(const GeneratorMatrix& Q, const std::vector<double>& f) {
    const std::size_t S = Q.states();
    std::vector<double> out(S, 0.0);
    for (std::size_t i = 0; i < S; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < S; ++j) s += Q(i, j) * f[j];
        out[i] = s;
    }
    return out;
}

inline std::vector<double> tabulate_observable(int n, const std::function<double(const Configuration&)>& f) {
    const std::size_t S = std::size_t{1} << (n - 1);
    std::vector<double> v(S);
    for (std::size_t i = 0; i < S; ++i) v[i] = f(Configuration::from_index(n, i));
    return v;
}

}  // namespace lrex
