#pragma once

// Counter-based random streams (Philox4x32-10) keyed by (seed, stream id).
// A stream is a pure function of its key and block counter, so ensembles
// reproduce bit-for-bit regardless of how trajectories are assigned to
// workers.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/random/exponential_distribution.hpp>

namespace lrex {

struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }

    static constexpr Counter apply(Counter c, Key k) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k[0] += kWeyl0;
                k[1] += kWeyl1;
            }
            c = round(c, k);
        }
        return c;
    }
};

/// One reproducible random stream. Counter words 2..3 carry the stream id,
/// words 0..1 the block index.
class Stream {
public:
    Stream() : Stream(0, 0) {}
    Stream(std::uint64_t seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          id_(stream_id) {}

    std::uint64_t stream_id() const { return id_; }

    // UniformRandomBitGenerator interface
    using result_type = std::uint32_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return next_u32(); }

    std::uint32_t next_u32() {
        if (pos_ == 4 * kBlocks) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    /// Exponential(rate) by the ziggurat method.
    double exponential(double rate) { return boost::random::exponential_distribution<double>(rate)(*this); }

    /// Uniform integer in [0, bound), Lemire's method without bias.
    std::uint32_t below(std::uint32_t bound) {
        std::uint64_t m = static_cast<std::uint64_t>(next_u32()) * bound;
        auto low = static_cast<std::uint32_t>(m);
        if (low < bound) {
            const std::uint32_t threshold = (0u - bound) % bound;
            while (low < threshold) {
                m = static_cast<std::uint64_t>(next_u32()) * bound;
                low = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    bool coin() { return (next_u32() & 1u) != 0; }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double phi = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

private:
    static constexpr int kBlocks = 16;

    // Sixteen consecutive counter blocks at once, lanes laid out for SIMD.
    void refill() {
        alignas(64) std::uint32_t c0[kBlocks], c1[kBlocks], c2[kBlocks], c3[kBlocks];
        for (int i = 0; i < kBlocks; ++i) {
            const std::uint64_t b = block_ + static_cast<std::uint64_t>(i);
            c0[i] = static_cast<std::uint32_t>(b);
            c1[i] = static_cast<std::uint32_t>(b >> 32);
            c2[i] = static_cast<std::uint32_t>(id_);
            c3[i] = static_cast<std::uint32_t>(id_ >> 32);
        }
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k0 += Philox4x32::kWeyl0;
                k1 += Philox4x32::kWeyl1;
            }
#pragma omp simd
            for (int i = 0; i < kBlocks; ++i) {
                const std::uint64_t p0 = static_cast<std::uint64_t>(Philox4x32::kMul0) * c0[i];
                const std::uint64_t p1 = static_cast<std::uint64_t>(Philox4x32::kMul1) * c2[i];
                const auto n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[i] ^ k0;
                const auto n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[i] ^ k1;
                c1[i] = static_cast<std::uint32_t>(p1);
                c3[i] = static_cast<std::uint32_t>(p0);
                c0[i] = n0;
                c2[i] = n2;
            }
        }
        for (int i = 0; i < kBlocks; ++i) {
            buf_[4 * i] = c0[i];
            buf_[4 * i + 1] = c1[i];
            buf_[4 * i + 2] = c2[i];
            buf_[4 * i + 3] = c3[i];
        }
        block_ += kBlocks;
        pos_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t id_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4 * kBlocks> buf_{};
    int pos_ = 4 * kBlocks;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lrex
