#pragma once

#include <cstdint>
#include <random>

namespace qdc {

/// SplitMix64 finalizer. Full-avalanche 64-bit mix; the basis for seed
/// derivation and the keyed message digest.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Counter-based split of one root seed into independent stream seeds, so
/// shots and nodes can derive their own generators without coordination.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ull));
}

/// Deterministic random stream. mt19937_64 output is pinned by the standard,
/// so sequences reproduce bit-for-bit across platforms; distribution adaptors
/// from <random> are avoided for the same reason.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Stream `stream` of root seed `seed`.
  static Rng split(std::uint64_t seed, std::uint64_t stream) {
    return Rng(derive_seed(seed, stream));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qdc
