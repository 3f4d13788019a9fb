#pragma once

// Counter-based random streams. A stream is keyed by (seed, key path); the
// same key path always yields the same sequence, independent of how many
// other streams were drawn before it.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <vector>

namespace qrotor {

std::uint64_t splitmix64(std::uint64_t x);

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0, std::initializer_list<std::uint64_t> keys = {});

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Independent child stream; does not advance this one.
  RngStream substream(std::uint64_t key) const;
  RngStream substream(std::initializer_list<std::uint64_t> keys) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// Key purposes used by the samplers.
enum class Purpose : std::uint64_t { chain = 1, proposal = 2, rdm = 3, scan = 4, test = 5 };

}  // namespace qrotor
