#pragma once

// Observables the engine tracks along a trajectory. Each channel is
//   V(eta) = c + sum_x b_x eta_bar_x + sum_{x,y} K_xy eta_bar_x eta_bar_y
// (linear channels have K = 0). Values update on every flip; between flips
// they are constant, so time integrals accumulate exactly.
//
// Kernels are stored as a sum of structured terms so a flip costs one pass
// over cache-resident data:
//   Toeplitz product  K_xy = f(x) T(y - x) g(y)
//   banded            K_xy = explicit entries for lo(x) <= y <= hi(x)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrex/configuration.hpp"

namespace lrex {

namespace detail {

inline double dot(const double* a, const double* b, std::size_t len) {
    double s = 0.0;
#pragma omp simd reduction(+ : s)
    for (std::size_t i = 0; i < len; ++i) s += a[i] * b[i];
    return s;
}

// sum_r f_r * (T . u_r) in one pass over T.
template <std::size_t K>
double fused_dot(const double* __restrict T, const double* const* u, const double* f, std::size_t len) {
    const double* __restrict u0 = u[0];
    if constexpr (K == 1) {
        double s0 = 0.0;
#pragma omp simd reduction(+ : s0)
        for (std::size_t i = 0; i < len; ++i) s0 += T[i] * u0[i];
        return f[0] * s0;
    } else if constexpr (K == 2) {
        const double* __restrict u1 = u[1];
        double s0 = 0.0, s1 = 0.0;
#pragma omp simd reduction(+ : s0, s1)
        for (std::size_t i = 0; i < len; ++i) {
            s0 += T[i] * u0[i];
            s1 += T[i] * u1[i];
        }
        return f[0] * s0 + f[1] * s1;
    } else {
        const double* __restrict u1 = u[1];
        const double* __restrict u2 = u[2];
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
#pragma omp simd reduction(+ : s0, s1, s2)
        for (std::size_t i = 0; i < len; ++i) {
            s0 += T[i] * u0[i];
            s1 += T[i] * u1[i];
            s2 += T[i] * u2[i];
        }
        return f[0] * s0 + f[1] * s1 + f[2] * s2;
    }
}

}  // namespace detail

class QuadraticForm {
public:
    /// K_xy = sum_r f_r(x) T(y - x) g_r(y), at most three pairs per group.
    struct Toeplitz {
        std::vector<double> T;               // index (y-x) + (n-2)
        std::vector<std::vector<double>> f;  // [r][x-1]
        std::vector<std::vector<double>> g;  // [r][y-1]
    };
    struct Banded {
        std::vector<int> lo;              // per row, sites
        std::vector<int> hi;
        std::vector<std::size_t> offset;  // start of row x in values
        std::vector<double> values;
    };

    QuadraticForm() = default;
    explicit QuadraticForm(int n) : n_(n), linear_(static_cast<std::size_t>(n - 1), 0.0) {}

    int n() const { return n_; }
    std::size_t sites() const { return static_cast<std::size_t>(n_ - 1); }

    double constant() const { return constant_; }
    const std::vector<double>& linear() const { return linear_; }
    const std::vector<Toeplitz>& toeplitz() const { return toeplitz_; }
    const std::vector<Banded>& banded() const { return banded_; }

    QuadraticForm& add_constant(double c) {
        constant_ += c;
        return *this;
    }

    QuadraticForm& add_linear(const std::vector<double>& b, double scale = 1.0) {
        if (b.size() != sites()) throw std::invalid_argument("QuadraticForm: linear part must have n-1 entries");
        for (std::size_t i = 0; i < b.size(); ++i) linear_[i] += scale * b[i];
        return *this;
    }

    /// K_xy += sum_r f_r(x) T(y-x) g_r(y); T is indexed by displacement + (n-2).
    QuadraticForm& add_toeplitz(std::vector<double> T, std::vector<std::vector<double>> f,
                                std::vector<std::vector<double>> g) {
        if (T.size() != 2 * sites() - 1 || f.size() != g.size() || f.empty() || f.size() > 3)
            throw std::invalid_argument("QuadraticForm: Toeplitz group has wrong shape");
        for (std::size_t r = 0; r < f.size(); ++r)
            if (f[r].size() != sites() || g[r].size() != sites())
                throw std::invalid_argument("QuadraticForm: Toeplitz factor must have n-1 entries");
        toeplitz_.push_back({std::move(T), std::move(f), std::move(g)});
        return *this;
    }

    /// Banded term from a row callback k(x, y) evaluated for |y - x| < width,
    /// clipped to the lattice.
    template <class F>
    QuadraticForm& add_banded(int width, F&& k) {
        Banded b;
        const int m = n_ - 1;
        for (int x = 1; x <= m; ++x) {
            const int lo = std::max(1, x - width + 1);
            const int hi = std::min(m, x + width - 1);
            b.lo.push_back(lo);
            b.hi.push_back(hi);
            b.offset.push_back(b.values.size());
            for (int y = lo; y <= hi; ++y) b.values.push_back(k(x, y));
        }
        banded_.push_back(std::move(b));
        return *this;
    }

    /// Dense kernel as a full-width band.
    QuadraticForm& add_dense(const std::vector<double>& kernel) {
        const std::size_t m = sites();
        if (kernel.size() != m * m) throw std::invalid_argument("QuadraticForm: dense kernel must be (n-1)^2");
        return add_banded(n_ - 1, [&](int x, int y) {
            return kernel[static_cast<std::size_t>(x - 1) * m + static_cast<std::size_t>(y - 1)];
        });
    }

    QuadraticForm& scale(double s) {
        constant_ *= s;
        for (double& v : linear_) v *= s;
        for (auto& t : toeplitz_)
            for (double& v : t.T) v *= s;
        for (auto& b : banded_)
            for (double& v : b.values) v *= s;
        return *this;
    }

    /// Sum of two forms on the same lattice.
    QuadraticForm& operator+=(const QuadraticForm& o) {
        if (o.n_ != n_) throw std::invalid_argument("QuadraticForm: lattice mismatch");
        constant_ += o.constant_;
        for (std::size_t i = 0; i < linear_.size(); ++i) linear_[i] += o.linear_[i];
        toeplitz_.insert(toeplitz_.end(), o.toeplitz_.begin(), o.toeplitz_.end());
        banded_.insert(banded_.end(), o.banded_.begin(), o.banded_.end());
        return *this;
    }

    /// K_xy.
    double entry(int x, int y) const {
        const auto i = static_cast<std::size_t>(x - 1), j = static_cast<std::size_t>(y - 1);
        double v = 0.0;
        for (const auto& t : toeplitz_)
            for (std::size_t r = 0; r < t.f.size(); ++r)
                v += t.f[r][i] * t.T[static_cast<std::size_t>(y - x + n_ - 2)] * t.g[r][j];
        for (const auto& b : banded_)
            if (y >= b.lo[i] && y <= b.hi[i]) v += b.values[b.offset[i] + static_cast<std::size_t>(y - b.lo[i])];
        return v;
    }

    /// Row-major dense kernel, for tests and small lattices.
    std::vector<double> dense() const {
        const std::size_t m = sites();
        std::vector<double> k(m * m);
        for (int x = 1; x <= n_ - 1; ++x)
            for (int y = 1; y <= n_ - 1; ++y)
                k[static_cast<std::size_t>(x - 1) * m + static_cast<std::size_t>(y - 1)] = entry(x, y);
        return k;
    }

    /// max |K_xy - K_yx|.
    double asymmetry() const {
        double worst = 0.0;
        for (int x = 1; x <= n_ - 1; ++x)
            for (int y = x + 1; y <= n_ - 1; ++y) worst = std::max(worst, std::abs(entry(x, y) - entry(y, x)));
        return worst;
    }

    /// (K eta_bar)_x given eta_bar and the products u[group][r] = g_r * eta_bar.
    double row(int x, const std::vector<double>& eta_bar,
               const std::vector<std::vector<std::vector<double>>>& products) const {
        const auto i = static_cast<std::size_t>(x - 1);
        const std::size_t m = sites();
        double s = 0.0;
        for (std::size_t q = 0; q < toeplitz_.size(); ++q) {
            const auto& t = toeplitz_[q];
            // T(y - x) for y = 1 starts at index n - 1 - x
            const double* Tx = t.T.data() + (m - 1 - i);
            const double* u[3];
            double f[3];
            const std::size_t k = t.f.size();
            for (std::size_t r = 0; r < k; ++r) {
                u[r] = products[q][r].data();
                f[r] = t.f[r][i];
            }
            if (k == 1) s += detail::fused_dot<1>(Tx, u, f, m);
            else if (k == 2) s += detail::fused_dot<2>(Tx, u, f, m);
            else s += detail::fused_dot<3>(Tx, u, f, m);
        }
        for (const auto& b : banded_) {
            const auto lo = static_cast<std::size_t>(b.lo[i] - 1);
            const auto len = static_cast<std::size_t>(b.hi[i] - b.lo[i] + 1);
            s += detail::dot(&b.values[b.offset[i]], &eta_bar[lo], len);
        }
        return s;
    }

    double diagonal(int x) const { return entry(x, x); }

    std::vector<std::vector<std::vector<double>>> products(const std::vector<double>& eta_bar) const {
        std::vector<std::vector<std::vector<double>>> u(toeplitz_.size());
        for (std::size_t q = 0; q < toeplitz_.size(); ++q)
            for (const auto& g : toeplitz_[q].g) {
                std::vector<double> v(eta_bar.size());
                for (std::size_t i = 0; i < v.size(); ++i) v[i] = g[i] * eta_bar[i];
                u[q].push_back(std::move(v));
            }
        return u;
    }

    double evaluate(const std::vector<double>& eta_bar) const {
        const auto u = products(eta_bar);
        double v = constant_;
        for (int x = 1; x <= n_ - 1; ++x) {
            const auto i = static_cast<std::size_t>(x - 1);
            v += eta_bar[i] * (linear_[i] + row(x, eta_bar, u));
        }
        return v;
    }

    double evaluate(const Configuration& c) const;

private:
    int n_ = 0;
    double constant_ = 0.0;
    std::vector<double> linear_;
    std::vector<Toeplitz> toeplitz_;
    std::vector<Banded> banded_;
};

class Observables {
public:
    struct Linear {
        std::string name;
        double constant = 0.0;
        std::vector<double> weight;  // index x-1
        bool track_sup = false;
    };
    struct Quadratic {
        std::string name;
        QuadraticForm form;
        std::vector<double> diagonal;  // K_xx, cached
        bool track_sup = false;
    };

    Observables() = default;
    explicit Observables(int n) : n_(n) {}

    int n() const { return n_; }
    std::size_t size() const { return linear_.size() + quadratic_.size(); }
    std::size_t linear_count() const { return linear_.size(); }
    std::size_t quadratic_count() const { return quadratic_.size(); }

    /// Adds a linear channel. Channels are addressed by name; linear channels
    /// always precede quadratic ones in the channel order.
    std::size_t add_linear(std::string name, std::vector<double> weight, double constant = 0.0,
                           bool track_sup = false) {
        if (weight.size() != static_cast<std::size_t>(n_ - 1))
            throw std::invalid_argument("linear weight must have n-1 entries");
        check_unique(name);
        linear_.push_back({std::move(name), constant, std::move(weight), track_sup});
        rebuild_site_major();
        return index(linear_.back().name);
    }

    /// Adds a quadratic channel.
    std::size_t add_quadratic(std::string name, QuadraticForm form, bool track_sup = false) {
        if (form.n() != n_) throw std::invalid_argument("quadratic form built for another n");
        check_unique(name);
        std::vector<double> diag(static_cast<std::size_t>(n_ - 1));
        for (int x = 1; x <= n_ - 1; ++x) diag[static_cast<std::size_t>(x - 1)] = form.diagonal(x);
        quadratic_.push_back({std::move(name), std::move(form), std::move(diag), track_sup});
        return linear_.size() + quadratic_.size() - 1;
    }

    const Linear& linear(std::size_t i) const { return linear_[i]; }
    const Quadratic& quadratic(std::size_t i) const { return quadratic_[i]; }

    /// Channel names, linear channels first.
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& c : linear_) out.push_back(c.name);
        for (const auto& c : quadratic_) out.push_back(c.name);
        return out;
    }

    std::size_t index(const std::string& name) const {
        for (std::size_t i = 0; i < linear_.size(); ++i)
            if (linear_[i].name == name) return i;
        for (std::size_t i = 0; i < quadratic_.size(); ++i)
            if (quadratic_[i].name == name) return linear_.size() + i;
        throw std::out_of_range("no channel '" + name + "'");
    }

    /// Linear weights laid out site-major: [(x-1) * linear_count() + j].
    const std::vector<double>& site_major() const { return site_major_; }

    double evaluate_linear(std::size_t i, const Configuration& c) const {
        const auto& ch = linear_[i];
        double v = ch.constant;
        for (int x = 1; x <= n_ - 1; ++x) v += ch.weight[static_cast<std::size_t>(x - 1)] * c.centered(x);
        return v;
    }

    /// Value of channel `i` (linear first) on a configuration.
    double evaluate(std::size_t i, const Configuration& c) const {
        return i < linear_.size() ? evaluate_linear(i, c)
                                  : quadratic_[i - linear_.size()].form.evaluate(centered_vector(c));
    }

    static std::vector<double> centered_vector(const Configuration& c) {
        std::vector<double> v(static_cast<std::size_t>(c.sites()));
        for (int x = 1; x <= c.sites(); ++x) v[static_cast<std::size_t>(x - 1)] = c.centered(x);
        return v;
    }

private:
    void check_unique(const std::string& name) const {
        for (const auto& c : linear_)
            if (c.name == name) throw std::invalid_argument("duplicate channel '" + name + "'");
        for (const auto& c : quadratic_)
            if (c.name == name) throw std::invalid_argument("duplicate channel '" + name + "'");
    }

    void rebuild_site_major() {
        const std::size_t L = linear_.size();
        const auto m = static_cast<std::size_t>(n_ - 1);
        site_major_.assign(m * L, 0.0);
        for (std::size_t j = 0; j < L; ++j)
            for (std::size_t x = 0; x < m; ++x) site_major_[x * L + j] = linear_[j].weight[x];
    }

    int n_ = 0;
    std::vector<Linear> linear_;
    std::vector<Quadratic> quadratic_;
    std::vector<double> site_major_;
};

inline double QuadraticForm::evaluate(const Configuration& c) const {
    return evaluate(Observables::centered_vector(c));
}

}  // namespace lrex
