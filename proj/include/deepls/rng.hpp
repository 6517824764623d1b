#pragma once

// Counter-based random numbers. Every stream is addressed by (seed, stream id)
// so the draws of one epoch never depend on how many numbers earlier epochs
// consumed. Distributions are implemented here rather than taken from <random>
// because the standard distributions are implementation-defined and would make
// sample batches differ across standard libraries.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace deepls {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3").
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) noexcept
{
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

/// Named sub-streams. Mixed with an epoch/trial index to form the 64-bit
/// stream id of the counter.
enum class StreamTag : std::uint32_t {
    init = 1,
    interior = 2,
    boundary = 3,
    test_set = 4,
    acceptance = 5,
    user = 6,
};

constexpr std::uint64_t make_stream(StreamTag tag, std::uint64_t index = 0) noexcept
{
    return (std::uint64_t{static_cast<std::uint32_t>(tag)} << 40) ^ index;
}

/// Philox-backed generator; models UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream)
    {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        if (lane_ == 2) {
            const auto out = philox4x32_10(
                {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                key_);
            block_[0] = (std::uint64_t{out[1]} << 32) | out[0];
            block_[1] = (std::uint64_t{out[3]} << 32) | out[2];
            ++counter_;
            lane_ = 0;
        }
        return block_[lane_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) noexcept
    {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t seed() const noexcept { return (std::uint64_t{key_[1]} << 32) | key_[0]; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> block_{};
    int lane_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace deepls
