#pragma once

#include <cstdint>
#include <limits>

namespace skewpath {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: the k-th output is a pure function of (seed, stream, k),
/// so sequences are reproducible across runs, platforms and worker schedules.
class SeededRng {
public:
    using result_type = std::uint64_t;

    explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : seed_(seed),
          stream_(stream),
          key_lo_(mix64(seed ^ 0x243F6A8885A308D3ULL)),
          key_hi_(mix64(stream + 0x9E3779B97F4A7C15ULL) ^ mix64(seed + 0x13198A2E03707344ULL)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t next_u64() noexcept { return mix64(mix64(counter_++ + key_lo_) ^ key_hi_); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * bound;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }
    std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_lo_;
    std::uint64_t key_hi_;
    std::uint64_t counter_ = 0;
};

}  // namespace skewpath
