#pragma once

// Occupancy configurations on Lambda_n = {1, ..., n-1} and the block
// statistics built on them.

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrex/random.hpp"

namespace lrex {

class Configuration {
public:
    Configuration() = default;

    /// Empty lattice of size n (sites 1..n-1).
    explicit Configuration(int n) : n_(n), words_(word_count(n), 0) {
        if (n < 3) throw std::invalid_argument("Configuration: n must be >= 3");
    }

    /// Configuration from a state index; site x is bit x-1.
    static Configuration from_index(int n, std::uint64_t index) {
        Configuration c(n);
        for (int x = 1; x <= n - 1; ++x)
            if ((index >> (x - 1)) & 1u) c.set(x, true);
        return c;
    }

    std::uint64_t index() const {
        if (n_ - 1 > 64) throw std::out_of_range("Configuration::index: more than 64 sites");
        return words_.empty() ? 0 : words_[0];
    }

    int n() const { return n_; }
    int sites() const { return n_ - 1; }
    int particles() const { return particles_; }

    bool occupied(int x) const {
        check(x);
        return test(x);
    }

    /// eta_x - 1/2
    double centered(int x) const { return occupied(x) ? 0.5 : -0.5; }

    /// Unchecked access for hot loops; x must lie in 1..n-1.
    bool test(int x) const {
        const auto i = static_cast<unsigned>(x - 1);
        return (words_[i >> 6] >> (i & 63u)) & 1u;
    }

    void set(int x, bool value) {
        check(x);
        if (test(x) != value) toggle(x);
    }

    /// In-place eta -> eta^x.
    void flip_inplace(int x) {
        check(x);
        toggle(x);
    }

    /// In-place eta -> eta^{x,y}.
    void swap_inplace(int x, int y) {
        check(x);
        check(y);
        if (test(x) != test(y)) {
            toggle(x);
            toggle(y);
        }
    }

    /// Unchecked toggle for the engine.
    void toggle(int x) {
        const auto i = static_cast<unsigned>(x - 1);
        const std::uint64_t mask = std::uint64_t{1} << (i & 63u);
        words_[i >> 6] ^= mask;
        particles_ += (words_[i >> 6] & mask) ? 1 : -1;
    }

    friend bool operator==(const Configuration& a, const Configuration& b) {
        return a.n_ == b.n_ && a.words_ == b.words_;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(static_cast<std::size_t>(sites()));
        for (int x = 1; x <= sites(); ++x) s.push_back(test(x) ? '1' : '0');
        return s;
    }

private:
    static std::size_t word_count(int n) { return static_cast<std::size_t>((n - 1 + 63) / 64); }

    void check(int x) const {
        if (x < 1 || x > n_ - 1)
            throw std::out_of_range("site " + std::to_string(x) + " outside Lambda_n = {1.." +
                                    std::to_string(n_ - 1) + "}");
    }

    int n_ = 0;
    std::vector<std::uint64_t> words_;
    int particles_ = 0;
};

inline Configuration flip(Configuration c, int x) {
    c.flip_inplace(x);
    return c;
}

inline Configuration swap(Configuration c, int x, int y) {
    c.swap_inplace(x, y);
    return c;
}

/// Product Bernoulli(1/2) configuration.
inline Configuration sample_bernoulli_half(int n, Stream& rng) {
    Configuration c(n);
    int x = 1;
    while (x <= n - 1) {
        std::uint32_t bits = rng.next_u32();
        for (int b = 0; b < 32 && x <= n - 1; ++b, ++x)
            if ((bits >> b) & 1u) c.toggle(x);
    }
    return c;
}

/// Window orientation for block averages.
enum class Anchor {
    Right,     // {x, ..., x+l-1}
    Left,      // {x-l+1, ..., x}
    Boundary,  // Right for x <= n-l-1, Left for x >= n-l
};

struct Window {
    int first = 0;
    int last = 0;
};

inline Window block_window(int n, int x, int l, Anchor anchor) {
    if (l < 1) throw std::invalid_argument("block window length must be >= 1");
    if (anchor == Anchor::Boundary) anchor = (x <= n - l - 1) ? Anchor::Right : Anchor::Left;
    Window w = anchor == Anchor::Right ? Window{x, x + l - 1} : Window{x - l + 1, x};
    if (w.first < 1 || w.last > n - 1)
        throw std::out_of_range("block window [" + std::to_string(w.first) + ", " +
                                std::to_string(w.last) + "] exits Lambda_n");
    return w;
}

/// Mean occupancy over the anchored window of length l.
inline double block_average(const Configuration& c, int x, int l, Anchor anchor = Anchor::Right) {
    const Window w = block_window(c.n(), x, l, anchor);
    int sum = 0;
    for (int y = w.first; y <= w.last; ++y) sum += c.test(y) ? 1 : 0;
    return static_cast<double>(sum) / l;
}

/// Conditional expectation of eta_bar(x) eta_bar(x+1) given the block
/// density: (l/(l-1)) * ((eta^l - 1/2)^2 - 1/(4l)).
inline double psi_from_block(double block_mean, int l) {
    if (l < 2) throw std::invalid_argument("psi requires block length l >= 2");
    const double c = block_mean - 0.5;
    return static_cast<double>(l) / (l - 1) * (c * c - 0.25 / l);
}

inline double psi(const Configuration& c, int x, int l, Anchor anchor = Anchor::Right) {
    if (l < 2) throw std::invalid_argument("psi requires block length l >= 2");
    return psi_from_block(block_average(c, x, l, anchor), l);
}

struct PsiMoments {
    double mean = 0.0;
    double second = 0.0;
};

/// Exact nu_{1/2} moments of psi^l by enumerating the Binomial(l, 1/2) block sum.
inline PsiMoments psi_moments(int l) {
    if (l < 2) throw std::invalid_argument("psi requires block length l >= 2");
    PsiMoments m;
    for (int s = 0; s <= l; ++s) {
        const double logp = std::lgamma(l + 1.0) - std::lgamma(s + 1.0) - std::lgamma(l - s + 1.0) -
                            l * std::log(2.0);
        const double p = std::exp(logp);
        const double v = psi_from_block(static_cast<double>(s) / l, l);
        m.mean += p * v;
        m.second += p * v * v;
    }
    return m;
}

}  // namespace lrex
