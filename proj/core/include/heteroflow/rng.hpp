#pragma once

#include <cstdint>
#include <random>

namespace heteroflow {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; derives independent child seeds from (root, stream, index)
// so records can be generated in any order and still be reproducible.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index = 0) {
  return mix64(mix64(mix64(root) ^ stream) ^ index);
}

inline Rng make_rng(std::uint64_t root, std::uint64_t stream, std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

}  // namespace heteroflow
