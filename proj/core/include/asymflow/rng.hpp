#ifndef ASYMFLOW_RNG_HPP
#define ASYMFLOW_RNG_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace asymflow {

/// Deterministic 64-bit PRNG (splitmix64). One instance per task; substreams
/// are derived with split() so concurrent components never share state.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (always consumes two draws).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Uniform direction on the (dim-1)-sphere.
  std::vector<double> direction(int dim) {
    std::vector<double> v(dim);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (int i = 0; i < dim; ++i) {
        v[i] = normal();
        n2 += v[i] * v[i];
      }
    } while (n2 < 1e-30);
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& x : v) x *= inv;
    return v;
  }

  /// Uniform point in the Euclidean ball of the given radius.
  std::vector<double> ball_point(int dim, double radius) {
    std::vector<double> v = direction(dim);
    const double r = radius * std::pow(uniform(), 1.0 / dim);
    for (auto& x : v) x *= r;
    return v;
  }

  /// Derived independent substream; deterministic in (seed, tag).
  Rng split(std::uint64_t tag) const {
    Rng r(state_ ^ (0x632be59bd9b4e019ULL * (tag + 1)));
    r.next_u64();
    return r;
  }

private:
  std::uint64_t state_;
};

}  // namespace asymflow

#endif
