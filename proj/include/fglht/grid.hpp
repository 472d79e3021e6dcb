#pragma once

#include <cmath>
#include <vector>

#include "fglht/error.hpp"

namespace fglht {

/// Common evaluation grid: M equispaced points spanning [a, b], endpoints
/// included. Integrals over the grid use the plain Riemann weight
/// volume()/size() throughout the library.
class Grid {
 public:
  Grid(double a, double b, int count) : a_(a), b_(b), count_(count) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
      throw DimensionError("Grid: interval must satisfy a < b");
    }
    if (count < 2) throw DimensionError("Grid: need at least 2 points");
  }

  double a() const { return a_; }
  double b() const { return b_; }
  int size() const { return count_; }
  double volume() const { return b_ - a_; }

  /// Riemann weight v(T)/M applied to every grid-point summand.
  double weight() const { return volume() / static_cast<double>(count_); }

  double point(int m) const {
    return a_ + static_cast<double>(m) * (b_ - a_) /
                    static_cast<double>(count_ - 1);
  }

  std::vector<double> points() const {
    std::vector<double> p(static_cast<std::size_t>(count_));
    for (int m = 0; m < count_; ++m) p[static_cast<std::size_t>(m)] = point(m);
    return p;
  }

  bool operator==(const Grid& o) const {
    return a_ == o.a_ && b_ == o.b_ && count_ == o.count_;
  }

 private:
  double a_;
  double b_;
  int count_;
};

}  // namespace fglht
