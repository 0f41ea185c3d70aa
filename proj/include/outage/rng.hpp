#pragma once

#include <cstdint>
#include <random>

namespace outage {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream), so parallel work items draw the
/// same numbers regardless of scheduling.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x534D4F47u};
  return Rng(seq);
}

}  // namespace outage
