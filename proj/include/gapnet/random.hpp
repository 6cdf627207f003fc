#pragma once

#include <cstdint>
#include <random>

namespace gapnet {

/// Seeded random stream. One per training job; never shared between threads.
using RandomStream = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for the `stream`-th child of `parent`.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept {
    return mix_seed(mix_seed(parent) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

inline RandomStream make_stream(std::uint64_t parent, std::uint64_t stream) {
    return RandomStream(derive_seed(parent, stream));
}

}  // namespace gapnet
