#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace fingergan {

/// Seeded pseudo-random stream. Equal seeds give equal sample sequences on
/// every platform: all conversions from raw 64-bit draws are done here
/// rather than through the implementation-defined std distributions.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0,1), multiples of 2^-53.
  double uniform01();
  /// Uniform on [lo,hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [lo,hi] (inclusive).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal via Box-Muller.
  double normal(double mean = 0.0, double stddev = 1.0);

  /// Independent child stream keyed by `index`; the parent is not advanced.
  RandomSource derive(std::uint64_t index) const;

  std::string serialize_state() const;
  void restore_state(const std::string& state);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer, used to derive stream seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

}  // namespace fingergan
