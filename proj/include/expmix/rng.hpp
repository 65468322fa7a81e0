#pragma once

#include <cmath>
#include <cstdint>

namespace expmix {

// splitmix64 step; the basis of all randomness in the project.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream: every (seed, index) pair owns an independent
// generator, so parallel sampling is worker-count independent.
class SampleRng {
 public:
  SampleRng(std::uint64_t seed, std::uint64_t index) {
    state_ = seed ^ (0x9e3779b97f4a7c15ULL * (index + 0x632be59bd9b4e019ULL));
    // decorrelate nearby indices
    splitmix64(state_);
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0,1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    // Box-Muller; one value per call keeps the stream layout simple.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace expmix
