#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ftlab {

namespace detail {

// Philox 4x32-10 block cipher (Salmon et al., counter-based RNG).
// The 128-bit counter is split between a 64-bit per-stream id and a
// 64-bit draw counter, so stream (seed, id) is addressable in O(1)
// regardless of how many values other streams consumed.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const std::array<std::uint32_t, 4> next = {
                static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                static_cast<std::uint32_t>(p1),
                static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                static_cast<std::uint32_t>(p0)};
            ctr = next;
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

}  // namespace detail

// One independent random stream, identified by (seed, stream_id).
// Pure function of its identifiers and draw count; safe to create one
// per Monte Carlo sample so ensembles are reproducible independently
// of evaluation order.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          stream_{static_cast<std::uint32_t>(stream_id),
                  static_cast<std::uint32_t>(stream_id >> 32)} {}

    std::uint64_t next_u64() {
        if (buf_pos_ >= 2) refill();
        return buf_[buf_pos_++];
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (pair generated, second cached).
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // Exponential with mean 1.
    double exponential() { return -std::log1p(-uniform01()); }

private:
    void refill() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(counter_),
            static_cast<std::uint32_t>(counter_ >> 32), stream_[0], stream_[1]};
        const auto out = detail::Philox4x32::block(ctr, key_);
        buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        buf_pos_ = 0;
        ++counter_;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint64_t counter_ = 0;
    std::uint64_t buf_[2] = {0, 0};
    int buf_pos_ = 2;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace ftlab
