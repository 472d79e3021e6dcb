#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <string>
#include <vector>

#include "fglht/error.hpp"
#include "fglht/grid.hpp"
#include "fglht/hypothesis.hpp"
#include "fglht/sample.hpp"

namespace fglht {

/// Per-group sample moments: mean curve, centered curves and the p x p
/// covariance matrix at every grid point.
struct GroupMoments {
  int n = 0;
  int p = 0;
  int points = 0;
  Eigen::RowVectorXd mean;                 // 1 x (p*M), grid-major
  Eigen::MatrixXd residuals;               // n x (p*M)
  std::vector<Eigen::MatrixXd> cov_diag;   // M matrices of size p x p

  /// Mean vector at grid point m.
  auto mean_at(int m) const { return mean.segment(m * p, p); }
  /// n x p residual block at grid point m.
  auto residuals_at(int m) const { return residuals.middleCols(m * p, p); }
};

/// Sample mean, centered curves and pointwise covariance of one group.
inline GroupMoments compute_moments(const GroupSample& g) {
  if (g.size() < 2) {
    throw DegenerateError("group '" + g.id() + "': need at least 2 curves");
  }
  GroupMoments mo;
  mo.n = g.size();
  mo.p = g.components();
  mo.points = g.points();
  mo.mean = g.curves().colwise().mean();
  mo.residuals = g.curves().rowwise() - mo.mean;
  mo.cov_diag.reserve(static_cast<std::size_t>(mo.points));
  const double inv = 1.0 / static_cast<double>(mo.n - 1);
  for (int m = 0; m < mo.points; ++m) {
    const auto block = mo.residuals.middleCols(m * mo.p, mo.p);
    Eigen::MatrixXd c = block.transpose() * block * inv;
    mo.cov_diag.push_back(0.5 * (c + c.transpose()));
  }
  return mo;
}

/// The pooled variation-due-to-error matrix at one grid point, together
/// with its (possibly ridged) inverse and symmetric inverse square root.
struct PooledPoint {
  Eigen::MatrixXd value;
  Eigen::MatrixXd inverse;
  Eigen::MatrixXd inv_sqrt;
  double min_eigenvalue = 0.0;
  bool ridged = false;
  bool zero = false;  // exactly-zero matrix: no variation at this point
};

/// Pooled pointwise covariance sum_a w_aa cov_a(t,t)/n_a across the grid.
struct PooledCovariance {
  std::vector<PooledPoint> pts;
  int ridge_events = 0;
  int zero_points = 0;

  const PooledPoint& at(int m) const { return pts[static_cast<std::size_t>(m)]; }
  int size() const { return static_cast<int>(pts.size()); }
};

/// Builds the pooled error matrix and inverts it per grid point. When the
/// smallest eigenvalue falls below 1e-10 x (trace/p) a ridge of
/// 1e-8 x (trace/p) is added to the diagonal and recorded; a point that is
/// exactly zero is marked instead of inverted (downstream code accepts it
/// only where the data carry no mass there). Failure to invert after the
/// ridge names the grid point.
inline PooledCovariance build_pooled(const std::vector<GroupMoments>& moments,
                                     const Hypothesis& hyp, const Grid& grid) {
  const int k = static_cast<int>(moments.size());
  if (k != hyp.groups()) {
    throw DimensionError("build_pooled: group count does not match hypothesis");
  }
  const int p = moments.front().p;
  const int points = moments.front().points;
  for (const auto& mo : moments) {
    if (mo.p != p || mo.points != points) {
      throw DimensionError("build_pooled: groups disagree on p or M");
    }
  }

  PooledCovariance pooled;
  pooled.pts.resize(static_cast<std::size_t>(points));
  for (int m = 0; m < points; ++m) {
    PooledPoint& pt = pooled.pts[static_cast<std::size_t>(m)];
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
    for (int a = 0; a < k; ++a) {
      omega += (hyp.weight(a, a) / static_cast<double>(moments[a].n)) *
               moments[a].cov_diag[static_cast<std::size_t>(m)];
    }
    pt.value = 0.5 * (omega + omega.transpose());
    const double scale = pt.value.trace() / static_cast<double>(p);
    if (scale == 0.0) {
      pt.zero = true;
      ++pooled.zero_points;
      continue;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pt.value);
    pt.min_eigenvalue = es.eigenvalues().minCoeff();
    if (pt.min_eigenvalue < 1e-10 * scale) {
      const double ridge = 1e-8 * scale;
      pt.value.diagonal().array() += ridge;
      es.compute(pt.value);
      pt.min_eigenvalue = es.eigenvalues().minCoeff();
      pt.ridged = true;
      ++pooled.ridge_events;
      if (pt.min_eigenvalue <= 0.0) {
        throw SingularityError(
            "pooled covariance is singular at t = " + std::to_string(grid.point(m)) +
            " even after ridging");
      }
    }
    const Eigen::ArrayXd ev = es.eigenvalues().array();
    const Eigen::MatrixXd& v = es.eigenvectors();
    pt.inverse = v * ev.inverse().matrix().asDiagonal() * v.transpose();
    pt.inverse = 0.5 * (pt.inverse + pt.inverse.transpose()).eval();
    pt.inv_sqrt = v * ev.rsqrt().matrix().asDiagonal() * v.transpose();
    pt.inv_sqrt = 0.5 * (pt.inv_sqrt + pt.inv_sqrt.transpose()).eval();
  }
  return pooled;
}

}  // namespace fglht
