#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace srdiag {

/// Seeded random source with a serializable state.
///
/// Distributions are implemented here on top of the raw 64-bit engine so that
/// streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller (no cached second value, so state is just the engine).
  double normal();

  /// Derive an independent child stream, e.g. one per component from a global seed.
  Rng fork(std::uint64_t stream_id) const;

  std::string serialize() const;
  static Rng deserialize(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to expand one seed into per-component seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id);

}  // namespace srdiag
