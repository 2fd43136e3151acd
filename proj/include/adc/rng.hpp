#pragma once

// Counter-based splittable RNG (Philox4x32-10, Salmon et al. 2011).
// A stream is addressed by (seed, stream); draws within a stream are
// addressed by a 64-bit block counter. Streams derived from distinct
// (seed, stream) pairs are independent for Monte Carlo purposes, which
// makes path ensembles reproducible regardless of scheduling.

#include <array>
#include <cmath>
#include <cstdint>

namespace adc {

class PhiloxRng {
public:
    PhiloxRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    // Uniform on [0,1).
    double uniform() {
        const std::uint64_t bits = next64();
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; second value cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        // u1 in (0,1] so the log is finite
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    std::uint64_t next64() {
        if (avail_ == 0) refill();
        const std::uint32_t lo = block_[--avail_];
        const std::uint32_t hi = block_[--avail_];
        return (static_cast<std::uint64_t>(hi) << 32) | lo;
    }

private:
    static constexpr std::uint32_t kW32A = 0x9E3779B9u;
    static constexpr std::uint32_t kW32B = 0xBB67AE85u;
    static constexpr std::uint32_t kM4x32A = 0xD2511F53u;
    static constexpr std::uint32_t kM4x32B = 0xCD9E8D57u;

    static void mulhilo(std::uint32_t a, std::uint32_t b,
                        std::uint32_t& lo, std::uint32_t& hi) noexcept {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        lo = static_cast<std::uint32_t>(p);
        hi = static_cast<std::uint32_t>(p >> 32);
    }

    void refill() noexcept {
        std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
        std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
        std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint32_t lo0, hi0, lo1, hi1;
            mulhilo(kM4x32A, c0, lo0, hi0);
            mulhilo(kM4x32B, c2, lo1, hi1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += kW32A; k1 += kW32B;
        }
        block_ = {c0, c1, c2, c3};
        ++counter_;
        avail_ = 4;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int avail_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace adc
