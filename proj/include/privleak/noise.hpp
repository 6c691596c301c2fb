/**
 * @file noise.hpp
 * @brief Counter-based Gaussian draws.
 *
 * Every standard-normal value is a pure function of (key, time index,
 * component), so trials and time steps can be generated in any order or in
 * parallel and still reproduce bit-identical sequences.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace privleak::noise {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b + 0x632BE59BD9B4E019ULL));
}

/// Independent stream key for trial `index` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return hash_combine(mix64(seed), index ^ 0xD1B54A32D192ED03ULL);
}

/// Uniform in the open interval (0, 1) from the top 53 bits.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard-normal draw keyed by (key, k, component), via Box-Muller.
inline double standard_normal(std::uint64_t key, std::uint64_t k, std::uint64_t component) noexcept {
  const std::uint64_t base = hash_combine(hash_combine(key, k), component);
  const double u1 = to_open_unit(mix64(base));
  const double u2 = to_open_unit(mix64(base ^ 0xA0761D6478BD642FULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace privleak::noise
