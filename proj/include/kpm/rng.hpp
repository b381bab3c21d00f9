#pragma once

#include <cstdint>
#include <random>

namespace kpm {

// Independent random streams of one engagement.
enum class Stream : std::uint64_t { Truth = 1, Filter = 2, Decision = 3, Scoring = 4 };

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed keyed by (base seed, run index, stream); independent of evaluation order.
inline std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t run_index, Stream stream) {
    std::uint64_t h = splitmix64(base_seed);
    h = splitmix64(h ^ run_index);
    return splitmix64(h ^ static_cast<std::uint64_t>(stream));
}

inline std::mt19937_64 make_stream(std::uint64_t base_seed, std::uint64_t run_index, Stream stream) {
    return std::mt19937_64(stream_seed(base_seed, run_index, stream));
}

// U[0, 1) with 53 random bits; stable across standard library implementations.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace kpm
