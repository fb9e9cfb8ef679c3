#pragma once

#include <cstdint>
#include <limits>

namespace medml {

// Counter-based 64-bit generator (SplitMix64 output function applied to a
// Weyl sequence). Draw k of stream (seed, id) is a pure function of
// (seed, id, k), so replication r can be generated on any thread, in any
// order, and reproduce bit-for-bit.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller; the spare variate is cached.
  double normal();
  // Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  // Independent child stream keyed on this stream's identity and `purpose`.
  RngStream derive(std::uint64_t purpose) const;

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace medml
