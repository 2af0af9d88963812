#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dmaze {

using Rng = std::mt19937_64;

// Child seed for (master, component, index). Hash-based so that adding a new
// component never shifts the streams of existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::string_view component,
                          std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view component,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(master, component, index));
}

// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace dmaze
