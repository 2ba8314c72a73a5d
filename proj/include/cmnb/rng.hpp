#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace cmnb {

// xoshiro256** seeded through splitmix64.
//
// Stream i of a seed is the seeded state advanced by i calls to jump(); each
// jump skips 2^128 draws, so streams never overlap in practice. uniform()
// uses the top 53 bits, which keeps the output identical on every platform.
class RngState {
 public:
  using result_type = std::uint64_t;

  explicit RngState(std::uint64_t seed = 0);

  static RngState for_stream(std::uint64_t seed, std::uint64_t stream);
  // Streams 0..count-1 of a seed.
  static std::vector<RngState> streams(std::uint64_t seed, std::size_t count);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  std::uint64_t next();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  void jump();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
};

}  // namespace cmnb
