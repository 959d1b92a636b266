#pragma once

#include <cstdint>
#include <random>

namespace kuraduel {

/// Independent engine for (seed, stream); std::seed_seq and mt19937_64 are
/// fully specified, so draws are identical on every conforming platform.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform on [0, 1) from the top 53 bits (std::uniform_real_distribution is
/// implementation-defined).
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace kuraduel
