#pragma once

#include <cstdint>
#include <limits>

namespace lfp {

// Stream identifiers reserved for draws that are not tied to a colliding pair.
inline constexpr std::uint64_t kSchedulerStream = std::numeric_limits<std::uint64_t>::max();
inline constexpr std::uint64_t kInitialStep = std::numeric_limits<std::uint64_t>::max();

/// 64-bit finalizer from SplitMix64.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based hash of the full key. Pure; no hidden state.
constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t step, std::uint64_t pair_index,
                                 std::uint64_t draw_counter) noexcept {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ step);
  h = mix64(h ^ (pair_index * 0xd1342543de82ef95ULL));
  h = mix64(h ^ draw_counter);
  return h;
}

/// Maps 64 random bits onto [0,1) with 53-bit resolution.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform in [0,1) keyed by (seed, step, pair_index, draw_counter).
constexpr double uniform_at(std::uint64_t seed, std::uint64_t step, std::uint64_t pair_index,
                            std::uint64_t draw_counter) noexcept {
  return to_unit(hash_key(seed, step, pair_index, draw_counter));
}

/// Uniform integer in [0, n) keyed the same way (multiply-shift; bias below n / 2^64).
inline std::uint64_t uniform_index_at(std::uint64_t seed, std::uint64_t step, std::uint64_t pair_index,
                                      std::uint64_t draw_counter, std::uint64_t n) noexcept {
  const auto bits = hash_key(seed, step, pair_index, draw_counter);
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * n) >> 64);
}

/// A position in the counter space. Copying a stream copies its position, so two copies replay the
/// same draws.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::uint64_t pair_index = 0;
  std::uint64_t draw_counter = 0;

  double uniform() noexcept { return uniform_at(seed, step, pair_index, draw_counter++); }
  std::uint64_t index(std::uint64_t n) noexcept {
    return uniform_index_at(seed, step, pair_index, draw_counter++, n);
  }
  /// Standard normal via Box-Muller; consumes two draws.
  double normal() noexcept;
};

/// Derives an independent seed, e.g. for the m-th Monte Carlo sample in z.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return mix64(mix64(seed) ^ mix64(salt ^ 0x243f6a8885a308d3ULL));
}

/// Stochastic rounding: floor(x)+1 with probability frac(x), floor(x) otherwise.
/// Throws std::invalid_argument for negative or non-finite x.
std::int64_t sround(double x, double u);

}  // namespace lfp
