#pragma once

#include <cmath>
#include <cstdint>

#include "deepls/error.hpp"

namespace deepls {

namespace detail {
// ceil(0.999 * n * j / 1000) computed exactly in integers.
constexpr std::uint64_t stair_start(std::uint64_t n, std::uint64_t j) noexcept
{
    return (999u * n * j + 999'999u) / 1'000'000u;
}
} // namespace detail

/// Staircase learning rate: 1000 plateaus decaying from 1e-3 to ~1e-6 in equal
/// log steps over the first 99.9% of training, then 1e-6 for the remainder.
///   τ(k) = 10^(-3 - 3j/1000)  for ceil(0.999n j/1000) <= k < ceil(0.999n (j+1)/1000)
///   τ(k) = 1e-6               for ceil(0.999n) <= k < n
inline double learning_rate(std::uint64_t k, std::uint64_t n)
{
    if (n == 0 || k >= n)
        fail(ErrorKind::contract, "learning_rate: epoch index out of range");
    if (k >= detail::stair_start(n, 1000))
        return 1e-6;
    // largest j with stair_start(n, j) <= k
    std::uint64_t lo = 0, hi = 999;
    while (lo < hi) {
        const std::uint64_t mid = (lo + hi + 1) / 2;
        if (detail::stair_start(n, mid) <= k)
            lo = mid;
        else
            hi = mid - 1;
    }
    if (lo == 0)
        return 1e-3;
    return std::pow(10.0, -3.0 - 3.0 * double(lo) / 1000.0);
}

/// Parameters of the staircase schedule.
struct LrSchedule {
    std::uint64_t epochs = 20000;
    double operator()(std::uint64_t k) const { return learning_rate(k, epochs); }
};

} // namespace deepls
