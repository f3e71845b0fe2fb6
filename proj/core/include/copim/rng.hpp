#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace copim::rng {

// splitmix64 step; also used as the mixing function for stream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Collapse (seed, tag, tag, ...) into one stream key. Streams built from
// distinct tag tuples never share state, so draws are independent of
// evaluation order and thread schedule.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = 0x243f6a8885a308d3ULL;
  for (std::uint64_t t : tags) {
    std::uint64_t x = s ^ (t + 0x9e3779b97f4a7c15ULL);
    s = splitmix64(x);
  }
  return s;
}

// Small self-contained generator. The distributions are implemented by
// hand (Box-Muller, inverse transform) so that sequences are identical
// across standard libraries and platforms.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // [0, 1)
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // (0, 1]; safe as a log() argument.
  double uniform01_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double gaussian() {
    double u1 = uniform01_pos();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

  double exponential(double mean) { return -mean * std::log(uniform01_pos()); }

  // Inclusive bounds. Modulo bias is irrelevant at the ranges used here.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() %
                                 static_cast<std::uint64_t>(hi - lo + 1));
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::uint64_t state_;
};

inline Stream stream_for(std::initializer_list<std::uint64_t> tags) {
  return Stream(derive_seed(tags));
}

}  // namespace copim::rng
