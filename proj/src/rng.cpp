#include "cmnb/rng.hpp"

namespace cmnb {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngState::RngState(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) word = splitmix64(x);
}

RngState RngState::for_stream(std::uint64_t seed, std::uint64_t stream) {
  RngState rng(seed);
  for (std::uint64_t i = 0; i < stream; ++i) rng.jump();
  return rng;
}

std::vector<RngState> RngState::streams(std::uint64_t seed, std::size_t count) {
  std::vector<RngState> out;
  out.reserve(count);
  RngState rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(rng);
    rng.jump();
  }
  return out;
}

std::uint64_t RngState::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  ++draws_;
  return result;
}

double RngState::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

void RngState::jump() {
  static constexpr std::uint64_t kJump[] = {0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                            0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
  std::uint64_t t[4] = {0, 0, 0, 0};
  for (std::uint64_t word : kJump) {
    for (int b = 0; b < 64; ++b) {
      if (word & (std::uint64_t{1} << b)) {
        for (int i = 0; i < 4; ++i) t[i] ^= s_[i];
      }
      next();
    }
  }
  for (int i = 0; i < 4; ++i) s_[i] = t[i];
  draws_ = 0;
}

}  // namespace cmnb
