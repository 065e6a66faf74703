#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace chainrank {

// One global seed, per-stage derived streams: toggling a flag in one stage
// must not perturb random draws in another.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
    // FNV-1a over the stream label, mixed with seed and index (splitmix64 finalizer).
    std::uint64_t h = 14695981039346656037ull;
    for (char c : stream) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (h ^ (index + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
    return std::mt19937_64(derive_seed(seed, stream, index));
}

}  // namespace chainrank
