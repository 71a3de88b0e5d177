#pragma once
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fw {

// Counter-based random stream: every draw is a pure function of
// (seed, stream, counter).  No global state, no platform-dependent
// distributions, so reruns and parallel task splits are byte-stable.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
public:
  Rng(uint64_t seed, uint64_t stream = 0)
      : base_(mix64(mix64(seed) ^ mix64(stream * 0xd1342543de82ef95ull + 1))) {}

  // child stream for task #idx; independent of draws made so far
  Rng child(uint64_t idx) const { return Rng(base_, idx + 0x632be59bd9b4e019ull); }

  uint64_t bits() { return mix64(base_ + (++counter_) * 0x9e3779b97f4a7c15ull); }

  double uniform() { return double(bits() >> 11) * 0x1.0p-53; }  // [0,1)

  // standard normal via Box-Muller (second value discarded: keeps draws counter-pure)
  double normal() {
    double u1 = uniform(), u2 = uniform();
    while (u1 == 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // index into a cumulative-weight table (inverse CDF)
  int pick_cumulative(const std::vector<double>& cumw) {
    double u = uniform();
    for (size_t i = 0; i < cumw.size(); ++i)
      if (u < cumw[i]) return int(i);
    return int(cumw.size()) - 1;
  }

private:
  uint64_t base_;
  uint64_t counter_ = 0;
};

inline std::vector<double> cumulative(const std::vector<double>& w) {
  if (w.empty()) throw std::invalid_argument("empty weight vector");
  std::vector<double> c(w.size());
  double acc = 0;
  for (size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 0) throw std::invalid_argument("negative weight");
    acc += w[i];
    c[i] = acc;
  }
  if (acc <= 0) throw std::invalid_argument("weights sum to zero");
  for (auto& x : c) x /= acc;
  c.back() = 1.0;
  return c;
}

}  // namespace fw
