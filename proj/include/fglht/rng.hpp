#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "fglht/error.hpp"

namespace fglht {

/// splitmix64 finalizer; used for seed derivation only.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for subtask `index` of a run seeded with `master`. Independent of
/// execution order, so parallel replications stay reproducible.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Deterministic random stream. All variates are produced from explicit
/// arithmetic on the raw 64-bit engine output, so a (seed, call sequence)
/// pair yields the same doubles on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
  }

  /// Uniform integer in [0, n), unbiased via rejection.
  int uniform_int(int n) {
    const std::uint64_t nn = static_cast<std::uint64_t>(n);
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() / nn * nn;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return static_cast<int>(x % nn);
  }

  /// Standard normal via the Marsaglia polar method (spare value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Chi-square with integer df as a sum of squared normals.
  double chi_square(int df) {
    double s = 0.0;
    for (int i = 0; i < df; ++i) {
      const double z = normal();
      s += z * z;
    }
    return s;
  }

  /// Student t with integer df as normal / sqrt(chi2/df).
  double student_t(int df) {
    return normal() / std::sqrt(chi_square(df) / static_cast<double>(df));
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fglht
