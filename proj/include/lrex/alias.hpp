#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "lrex/random.hpp"

namespace lrex {

/// Walker/Vose alias table over {0..k-1} with probabilities proportional to
/// the given nonnegative weights.
class AliasTable {
public:
    AliasTable() = default;

    explicit AliasTable(std::span<const double> weights) {
        const std::size_t k = weights.size();
        if (k == 0) throw std::invalid_argument("AliasTable: empty weight vector");
        total_ = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw std::invalid_argument("AliasTable: negative or NaN weight");
            total_ += w;
        }
        if (!(total_ > 0.0)) throw std::invalid_argument("AliasTable: all weights zero");

        prob_.assign(k, 0.0);
        alias_.assign(k, 0);
        std::vector<double> scaled(k);
        std::vector<std::uint32_t> small, large;
        small.reserve(k);
        large.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            scaled[i] = weights[i] * static_cast<double>(k) / total_;
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            const auto s = small.back();
            small.pop_back();
            const auto l = large.back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (auto l : large) prob_[l] = 1.0;
        for (auto s : small) prob_[s] = 1.0;  // round-off leftovers
        cutoff_.resize(k);
        for (std::size_t i = 0; i < k; ++i)
            cutoff_[i] = prob_[i] >= 1.0 ? kAlways : static_cast<std::uint64_t>(std::ldexp(prob_[i], 64));
    }

    std::size_t size() const { return prob_.size(); }
    double total_weight() const { return total_; }

    /// One 64-bit word per draw: the high half of u*k picks the column, the
    /// low half is the coin against the column's cutoff.
    std::uint32_t sample(Stream& rng) const {
        const unsigned __int128 prod =
            static_cast<unsigned __int128>(rng.next_u64()) * static_cast<std::uint64_t>(prob_.size());
        const auto i = static_cast<std::uint32_t>(prod >> 64);
        const auto coin = static_cast<std::uint64_t>(prod);
        return (coin < cutoff_[i] || cutoff_[i] == kAlways) ? i : alias_[i];
    }

    /// Exact probability of drawing `i`, reconstructed from the table.
    double probability(std::size_t i) const {
        const double k = static_cast<double>(prob_.size());
        double p = prob_[i] / k;
        for (std::size_t j = 0; j < prob_.size(); ++j)
            if (alias_[j] == i) p += (1.0 - prob_[j]) / k;
        return p;
    }

private:
    static constexpr std::uint64_t kAlways = ~std::uint64_t{0};

    std::vector<double> prob_;
    std::vector<std::uint64_t> cutoff_;
    std::vector<std::uint32_t> alias_;
    double total_ = 0.0;
};

}  // namespace lrex
