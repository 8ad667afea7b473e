#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace bifid {

/// Independent random stream derived from a base seed and stream labels, so
/// that work items can be generated in any order (or in parallel) with the
/// same results.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) {
  std::vector<std::uint32_t> words;
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto l : labels) push(l);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

/// Derived 64-bit seed for APIs that take a seed rather than an engine.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) {
  auto rng = stream_rng(seed, labels);
  return rng();
}

}  // namespace bifid
