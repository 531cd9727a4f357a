#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace brdf {

using Rng = std::mt19937_64;

/// Mixes a base seed with a list of stream tags into an independent seed.
/// Used to fan one user seed out into per-tree / per-candidate streams.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {}) {
    return Rng(derive_seed(seed, tags));
}

// Stream tags.
namespace stream {
inline constexpr std::uint64_t tree = 0x7472656500000000ULL;
inline constexpr std::uint64_t candidate = 0x63616e6400000000ULL;
inline constexpr std::uint64_t folds = 0x666f6c6400000000ULL;
inline constexpr std::uint64_t volume = 0x766f6c7500000000ULL;
inline constexpr std::uint64_t test = 0x7465737400000000ULL;
inline constexpr std::uint64_t train = 0x747261696e000000ULL;
}  // namespace stream

double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace brdf
