#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace declinecast {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(mix64(parent) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t fnv1a(std::string_view s,
                              std::uint64_t h = 0xCBF29CE484222325ULL) noexcept {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag) noexcept {
    return derive_seed(parent, fnv1a(tag));
}

}  // namespace declinecast
