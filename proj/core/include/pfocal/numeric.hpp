#pragma once

#include <cstddef>
#include <span>

namespace pfocal {

/// Deterministic pairwise (cascade) summation. Error grows like log2(n)*eps
/// instead of n*eps, and the result is independent of any parallel schedule
/// because it is always evaluated in the same fixed order.
[[nodiscard]] inline double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n <= 8) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace pfocal
