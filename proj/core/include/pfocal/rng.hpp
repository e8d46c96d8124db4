#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pfocal::rng {

/// splitmix64 finalizer; the standard 64-bit mixing function.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Chains a seed with stream identifiers into one well-mixed 64-bit value.
/// Used to derive independent, reproducible substreams per (module, scan,
/// trial, ...) so that parallel scheduling never changes which stream draws
/// what.
constexpr std::uint64_t mix(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t id : ids) h = splitmix64(h ^ id);
    return h;
}

// Stream tags. Values are arbitrary but fixed: changing them changes every
// sampled trajectory.
inline constexpr std::uint64_t kInitStream = 0x01;
inline constexpr std::uint64_t kPredictStream = 0x02;
inline constexpr std::uint64_t kResampleStream = 0x03;
inline constexpr std::uint64_t kTruthStream = 0x04;
inline constexpr std::uint64_t kScanStream = 0x05;
inline constexpr std::uint64_t kWaveformStream = 0x06;
inline constexpr std::uint64_t kTrialStream = 0x07;
inline constexpr std::uint64_t kReinitStream = 0x08;
inline constexpr std::uint64_t kScenarioStream = 0x09;
inline constexpr std::uint64_t kFilterStream = 0x0a;

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    return std::mt19937_64(mix(seed, {stream, a, b}));
}

}  // namespace pfocal::rng
