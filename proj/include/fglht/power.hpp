#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fglht/chisq.hpp"
#include "fglht/error.hpp"
#include "fglht/grid.hpp"
#include "fglht/surface.hpp"

namespace fglht {

/// Population quantities of the limit experiment: hypothesized group mean
/// curves, limiting group proportions, true covariance surfaces, the
/// contrast, the total sample size the power is evaluated at, and the
/// level. Covariances are full (s,t) surfaces; the variance of the limit
/// needs their off-diagonal mass.
struct PowerInput {
  Grid grid{0.0, 1.0, 2};
  std::vector<Eigen::MatrixXd> mean;      // k matrices, p x M
  std::vector<double> tau;                // k proportions, sum to 1
  std::vector<DenseCovSurface> cov;       // k surfaces, (p*M) x (p*M)
  Eigen::MatrixXd contrast;               // q x k
  double total_n = 0.0;
  double alpha = 0.05;
  bool finite_df = false;  // use the chi-square form instead of the normal limit
};

/// Asymptotic power of the test under a local alternative: the normal form
///   Phi(-z_alpha + drift / sd)
/// with drift n * integral of tr[M(t)^T W M(t) pooled^{-1}(t,t)], or the
/// finite-df chi-square form when requested. Equals alpha when the contrast
/// annihilates the means, and increases with the drift.
inline double asymptotic_power(const PowerInput& in) {
  const int k = static_cast<int>(in.mean.size());
  if (k < 2 || static_cast<int>(in.tau.size()) != k ||
      static_cast<int>(in.cov.size()) != k || in.contrast.cols() != k) {
    throw DimensionError("asymptotic_power: inconsistent group count");
  }
  double tau_sum = 0.0;
  for (double t : in.tau) {
    if (!(t > 0.0 && t < 1.0)) throw DimensionError("asymptotic_power: tau outside (0,1)");
    tau_sum += t;
  }
  if (std::fabs(tau_sum - 1.0) > 1e-12) {
    throw DimensionError("asymptotic_power: tau must sum to 1");
  }
  if (!(in.alpha > 0.0 && in.alpha < 1.0)) {
    throw DimensionError("asymptotic_power: alpha outside (0,1)");
  }
  const int p = static_cast<int>(in.mean.front().rows());
  const int points = in.grid.size();

  // Limit weight matrix with D* = diag(1/tau).
  Eigen::VectorXd dstar(k);
  for (int a = 0; a < k; ++a) dstar(a) = 1.0 / in.tau[static_cast<std::size_t>(a)];
  const Eigen::MatrixXd gram =
      in.contrast * dstar.asDiagonal() * in.contrast.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (gram + gram.transpose()));
  if (llt.info() != Eigen::Success) {
    throw HypothesisError("asymptotic_power: contrast is rank deficient");
  }
  const Eigen::MatrixXd gram_inv = llt.solve(
      Eigen::MatrixXd::Identity(in.contrast.rows(), in.contrast.rows()));
  const Eigen::MatrixXd wstar =
      in.contrast.transpose() * gram_inv * in.contrast;  // k x k

  // Limit pooled covariance: per grid point, sum_a w*_aa cov_a(t,t)/tau_a.
  // Reuse the pooled machinery by wrapping it as pseudo group moments.
  PooledCovariance pooled;
  pooled.pts.resize(static_cast<std::size_t>(points));
  for (int m = 0; m < points; ++m) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
    for (int a = 0; a < k; ++a) {
      omega += wstar(a, a) / in.tau[static_cast<std::size_t>(a)] *
               in.cov[static_cast<std::size_t>(a)].block(m, m);
    }
    PooledPoint& pt = pooled.pts[static_cast<std::size_t>(m)];
    pt.value = 0.5 * (omega + omega.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pt.value);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw SingularityError("asymptotic_power: limit covariance singular at t = " +
                             std::to_string(in.grid.point(m)));
    }
    pt.inverse = es.eigenvectors() *
                 es.eigenvalues().array().inverse().matrix().asDiagonal() *
                 es.eigenvectors().transpose();
    pt.inv_sqrt = es.eigenvectors() *
                  es.eigenvalues().array().rsqrt().matrix().asDiagonal() *
                  es.eigenvectors().transpose();
  }

  // Drift: n * (v/M) sum_m tr[ M(t)^T W* M(t) pooled^{-1} ].
  double drift = 0.0;
  Eigen::MatrixXd mt(k, p);
  for (int m = 0; m < points; ++m) {
    for (int a = 0; a < k; ++a) {
      mt.row(a) = in.mean[static_cast<std::size_t>(a)].col(m).transpose();
    }
    drift += (mt.transpose() * wstar * mt *
              pooled.pts[static_cast<std::size_t>(m)].inverse)
                 .trace();
  }
  drift *= in.total_n * in.grid.weight();

  // Variance: 2 sum_{a,b} w*_ab^2 pair-trace of standardized surfaces.
  std::vector<DenseCovSurface> std_surf;
  std_surf.reserve(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) {
    std_surf.push_back(standardize_surface(in.cov[static_cast<std::size_t>(a)],
                                           pooled, in.tau[static_cast<std::size_t>(a)]));
  }
  double var = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      var += 2.0 * wstar(a, b) * wstar(a, b) *
             surface_pair_trace(std_surf[static_cast<std::size_t>(a)],
                                std_surf[static_cast<std::size_t>(b)], in.grid);
    }
  }
  const double sd = std::sqrt(var);
  const double shift = drift / sd;

  if (!in.finite_df) {
    return norm_cdf(-norm_quantile(1.0 - in.alpha) + shift);
  }

  // Finite-df form: population third cumulant fixes the matched df.
  double k3 = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      for (int c = 0; c < k; ++c) {
        k3 += 8.0 * wstar(a, b) * wstar(b, c) * wstar(c, a) *
              surface_triple_trace(std_surf[static_cast<std::size_t>(a)],
                                   std_surf[static_cast<std::size_t>(b)],
                                   std_surf[static_cast<std::size_t>(c)], in.grid);
      }
    }
  }
  const double k2 = var;
  const double df = 8.0 * k2 * k2 * k2 / (k3 * k3);
  const ChiSquare chi(df);
  const double x = chi.upper_quantile(in.alpha) - std::sqrt(2.0 * df) * shift;
  if (x <= 0.0) return 1.0;
  return chi.sf(x);
}

}  // namespace fglht
