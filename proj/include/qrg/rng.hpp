#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace qrg {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

std::uint64_t splitmix64(std::uint64_t x);

// Hash of a stream name, so "graph" and "walk" streams never alias.
std::uint64_t name_hash(std::string_view name);

/// Seed for a named substream, e.g. stream_seed(master, "walk", {replica}).
std::uint64_t stream_seed(std::uint64_t master, std::string_view name,
                          std::initializer_list<std::uint64_t> idx = {});

inline Rng make_rng(std::uint64_t master, std::string_view name,
                    std::initializer_list<std::uint64_t> idx = {}) {
  return Rng(stream_seed(master, name, idx));
}

// Mix a sequence of keys into one 64-bit value. Used for the child sub-seeds of the quasi tree.
std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b);

/// Uniform integer in [0, n).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace qrg
