#pragma once

#include <cstdint>
#include <string_view>

#include "nphm/common.hpp"

namespace nphm {

/// Name recorded in manifests/configs so datasets are reproducible.
inline constexpr const char* kRngAlgorithm = "splitmix64-counter";

/// Stateless keyed mix: value at (seed, stream, counter).
std::uint64_t rng_mix(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// FNV-1a hash of a purpose label, used as a stream id.
std::uint64_t rng_stream(std::string_view label);

/// Counter-based generator. Draws advance only the counter, so any draw
/// can be reproduced from (seed, stream, counter) regardless of thread
/// interleaving elsewhere.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
  Rng(std::uint64_t seed, std::string_view label) : Rng(seed, rng_stream(label)) {}

  std::uint64_t next_u64() { return rng_mix(seed_, stream_, counter_++); }

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::int64_t uniform_int(std::int64_t n);
  /// Standard normal (Box-Muller; consumes two counter values).
  double normal();
  Vec3 normal3();

  std::uint64_t counter() const { return counter_; }
  void set_counter(std::uint64_t c) { counter_ = c; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace nphm
