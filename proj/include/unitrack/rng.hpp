#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace unitrack {

// SplitMix64. Fully specified by its 64-bit state, so seeded streams
// reproduce across platforms and standard-library versions (std::
// distributions do not guarantee that).
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) with 53-bit resolution.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Integer in [0, n).
  uint64_t uniform_int(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  /// Standard normal via Box-Muller (one value per call, no cache).
  double gaussian() {
    double u1 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Random unit vector in R^dim.
  std::vector<double> unit_vector(int dim) {
    std::vector<double> v(dim);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (auto& c : v) {
        c = gaussian();
        n2 += c * c;
      }
    } while (n2 < 1e-12);
    double inv = 1.0 / std::sqrt(n2);
    for (auto& c : v) c *= inv;
    return v;
  }

  /// Derive an independent stream, e.g. per sweep cell or per seed index.
  static uint64_t derive(uint64_t master, uint64_t index) {
    Rng r(master ^ (0xD1B54A32D192ED03ULL * (index + 1)));
    return r.next_u64();
  }

 private:
  uint64_t state_;
};

}  // namespace unitrack
