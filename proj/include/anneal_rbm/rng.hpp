#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace anneal_rbm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used only to derive seeds, never as a sampling stream.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stream tags for the first element of a derivation path.
enum class Stream : std::uint64_t {
  init = 1,
  negative = 2,
  reconstruction = 3,
  sampling = 4,
  noise = 5,
  evaluation = 6,
};

/// Derives a child seed from a master seed and a path of integers:
///   s0 = splitmix64(master), s_{k+1} = splitmix64(s_k ^ splitmix64(path_k)).
/// Every stochastic component owns a distinct path, so streams never overlap
/// regardless of thread scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p));
  return s;
}

inline Rng make_stream(std::uint64_t master, Stream tag,
                       std::initializer_list<std::uint64_t> path = {}) {
  std::uint64_t s = derive_seed(master, {static_cast<std::uint64_t>(tag)});
  for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p));
  return Rng(s);
}

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) noexcept { return uniform01(rng) < p; }

}  // namespace anneal_rbm
