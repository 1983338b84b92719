#pragma once

#include <concepts>
#include <cstdint>
#include <random>

namespace renewal {

/// Anything that hands out uniform variates in [0, 1).
template <typename T>
concept UniformSource = requires(T& source) {
  { source.next_uniform() } -> std::convertible_to<double>;
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Per-replica stream seed:
///   mix(master, i) = F(master + F(i + 1) * 0x9E3779B97F4A7C15)
/// where F is the SplitMix64 finalizer. For fixed master it is injective in i.
constexpr std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t replica_index) noexcept {
  return splitmix64_finalize(master_seed +
                             splitmix64_finalize(replica_index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// The pinned generator: std::mt19937_64 (period 2^19937 - 1, output sequence
/// fixed by the C++ standard) with 53-bit uniform extraction.
class Stream {
public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// k * 2^-53 for k uniform on [0, 2^53); never returns 1.
  double next_uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
  std::mt19937_64 engine_;
};

static_assert(UniformSource<Stream>);

}  // namespace renewal
