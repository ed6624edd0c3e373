#pragma once

#include <cstdint>
#include <random>

namespace spw {

/// Deterministic random stream identified by (seed, stream).
///
/// Each Monte-Carlo replication or draw gets its own stream id, so results
/// do not depend on scheduling. The engine is std::mt19937_64 seeded through
/// std::seed_seq from both halves of seed and stream; variates are produced
/// from raw engine bits rather than std:: distributions, whose output is
/// implementation-defined.
class RngHandle {
 public:
  RngHandle(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  bool bernoulli(double p);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace spw
