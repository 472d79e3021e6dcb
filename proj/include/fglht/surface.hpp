#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fglht/error.hpp"
#include "fglht/grid.hpp"
#include "fglht/moments.hpp"

namespace fglht {

/// Dense covariance surface of one group: a (p*M) x (p*M) matrix whose
/// (m, m') block of size p x p is the covariance between grid points m and
/// m'. Desk-scale only; the production path never materializes it.
struct DenseCovSurface {
  int p = 0;
  int points = 0;
  Eigen::MatrixXd mat;

  auto block(int m, int m2) const { return mat.block(m * p, m2 * p, p, p); }
};

/// Sample covariance surface from a group's centered curves.
inline DenseCovSurface dense_covariance(const GroupMoments& mo) {
  DenseCovSurface s;
  s.p = mo.p;
  s.points = mo.points;
  s.mat.noalias() = mo.residuals.transpose() * mo.residuals /
                    static_cast<double>(mo.n - 1);
  return s;
}

/// Standardized surface pooled^{-1/2}(s,s) cov(s,t) pooled^{-1/2}(t,t) / n.
inline DenseCovSurface standardize_surface(const DenseCovSurface& cov,
                                           const PooledCovariance& pooled,
                                           double n) {
  DenseCovSurface out;
  out.p = cov.p;
  out.points = cov.points;
  out.mat.resize(cov.mat.rows(), cov.mat.cols());
  for (int m = 0; m < cov.points; ++m) {
    const auto& pm = pooled.at(m);
    for (int m2 = 0; m2 < cov.points; ++m2) {
      const auto& pm2 = pooled.at(m2);
      if (pm.zero || pm2.zero) {
        out.mat.block(m * cov.p, m2 * cov.p, cov.p, cov.p).setZero();
      } else {
        out.mat.block(m * cov.p, m2 * cov.p, cov.p, cov.p) =
            pm.inv_sqrt * cov.block(m, m2) * pm2.inv_sqrt / n;
      }
    }
  }
  return out;
}

/// Riemann sum of tr[A(t,t)] over the grid.
inline double surface_trace(const DenseCovSurface& a, const Grid& grid) {
  double acc = 0.0;
  for (int m = 0; m < a.points; ++m) acc += a.block(m, m).trace();
  return grid.weight() * acc;
}

/// Double Riemann sum of tr[A(s,t) B(t,s)].
inline double surface_pair_trace(const DenseCovSurface& a,
                                 const DenseCovSurface& b, const Grid& grid) {
  double acc = 0.0;
  for (int m = 0; m < a.points; ++m) {
    for (int m2 = 0; m2 < a.points; ++m2) {
      acc += (a.block(m, m2) * b.block(m2, m)).trace();
    }
  }
  const double w = grid.weight();
  return w * w * acc;
}

/// Triple Riemann sum of tr[A(s,t) B(t,v) C(v,s)].
inline double surface_triple_trace(const DenseCovSurface& a,
                                   const DenseCovSurface& b,
                                   const DenseCovSurface& c, const Grid& grid) {
  const int p = a.p;
  double acc = 0.0;
  Eigen::MatrixXd ab(p, p);
  for (int m1 = 0; m1 < a.points; ++m1) {
    for (int m2 = 0; m2 < a.points; ++m2) {
      const auto a12 = a.block(m1, m2);
      for (int m3 = 0; m3 < a.points; ++m3) {
        ab.noalias() = a12 * b.block(m2, m3);
        acc += (ab * c.block(m3, m1)).trace();
      }
    }
  }
  const double w = grid.weight();
  return w * w * w * acc;
}

}  // namespace fglht
