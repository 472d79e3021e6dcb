#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "fglht/chisq.hpp"
#include "fglht/error.hpp"
#include "fglht/gram.hpp"
#include "fglht/grid.hpp"
#include "fglht/hypothesis.hpp"
#include "fglht/rng.hpp"
#include "fglht/surface.hpp"

// Slow, independent reference implementations. Test and validation surface
// only: O((pM)^3) sums and dense eigensolves.

namespace fglht {

inline void oracle_size_guard(int pm) {
  if (pm > 600) {
    throw DimensionError("oracle: refusing dense computation with p*M = " +
                         std::to_string(pm) + " > 600");
  }
}

/// Trace functionals computed straight from standardized dense surfaces by
/// double/triple Riemann sums of the defining integrals.
inline TraceEstimates brute_force_traces(
    const std::vector<DenseCovSurface>& standardized, const Grid& grid) {
  const int k = static_cast<int>(standardized.size());
  oracle_size_guard(standardized.front().p * standardized.front().points);
  TraceEstimates tr;
  tr.k = k;
  tr.single.resize(k);
  tr.pair.resize(k, k);
  tr.triple.assign(static_cast<std::size_t>(k) * k * k, 0.0);
  for (int a = 0; a < k; ++a) {
    tr.single(a) = surface_trace(standardized[static_cast<std::size_t>(a)], grid);
    for (int b = 0; b < k; ++b) {
      tr.pair(a, b) = surface_pair_trace(standardized[static_cast<std::size_t>(a)],
                                         standardized[static_cast<std::size_t>(b)],
                                         grid);
      for (int c = 0; c < k; ++c) {
        tr.triple[static_cast<std::size_t>((a * k + b) * k + c)] =
            surface_triple_trace(standardized[static_cast<std::size_t>(a)],
                                 standardized[static_cast<std::size_t>(b)],
                                 standardized[static_cast<std::size_t>(c)], grid);
      }
    }
  }
  return tr;
}

/// Convenience: standardized surfaces of every group from raw moments.
inline std::vector<DenseCovSurface> standardized_surfaces(
    const std::vector<GroupMoments>& moments, const PooledCovariance& pooled) {
  std::vector<DenseCovSurface> out;
  out.reserve(moments.size());
  for (const auto& mo : moments) {
    oracle_size_guard(mo.p * mo.points);
    out.push_back(standardize_surface(dense_covariance(mo), pooled,
                                      static_cast<double>(mo.n)));
  }
  return out;
}

/// Spectrum of the discretized null-limit kernel: eigenvalues in descending
/// order, nonnegative (tiny negatives from roundoff are clamped).
struct MixtureSpec {
  std::vector<double> eigenvalues;

  double sum(int power) const {
    double s = 0.0;
    for (double l : eigenvalues) {
      double t = l;
      for (int j = 1; j < power; ++j) t *= l;
      s += t;
    }
    return s;
  }
};

/// Eigenvalues of the standardized-covariance kernel of the null limit:
/// the (q*p*M)-dimensional discretization of
///   C diag[std-cov_1(s,t), ..., std-cov_k(s,t)] C^T,  C = Ctilde (x) I_p,
/// scaled by the Riemann weight, with Ctilde = (C D C^T)^{-1/2} C.
inline MixtureSpec kernel_eigenvalues(
    const std::vector<DenseCovSurface>& standardized, const Hypothesis& hyp,
    const Grid& grid) {
  const int k = static_cast<int>(standardized.size());
  const int p = standardized.front().p;
  const int points = standardized.front().points;
  const int q = hyp.rank();
  if (static_cast<long>(q) * p * points > 2000) {
    throw DimensionError("kernel_eigenvalues: dimension too large");
  }

  // Symmetric inverse square root of the size-weighted Gram matrix.
  Eigen::VectorXd d(k);
  for (int a = 0; a < k; ++a) {
    d(a) = 1.0 / static_cast<double>(hyp.sizes()[static_cast<std::size_t>(a)]);
  }
  const Eigen::MatrixXd gram =
      hyp.contrast() * d.asDiagonal() * hyp.contrast().transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ges(0.5 * (gram + gram.transpose()));
  const Eigen::MatrixXd gram_inv_sqrt = ges.eigenvectors() *
                                        ges.eigenvalues().array().rsqrt().matrix().asDiagonal() *
                                        ges.eigenvectors().transpose();
  const Eigen::MatrixXd ctilde = gram_inv_sqrt * hyp.contrast();  // q x k

  const int dim = q * p;
  Eigen::MatrixXd big(dim * points, dim * points);
  Eigen::MatrixXd blk(dim, dim);
  for (int m = 0; m < points; ++m) {
    for (int m2 = m; m2 < points; ++m2) {
      blk.setZero();
      for (int r = 0; r < q; ++r) {
        for (int r2 = 0; r2 < q; ++r2) {
          // sum over groups of ctilde(r,a) ctilde(r2,a) * surface block
          Eigen::MatrixXd cell = Eigen::MatrixXd::Zero(p, p);
          for (int a = 0; a < k; ++a) {
            cell += ctilde(r, a) * ctilde(r2, a) *
                    standardized[static_cast<std::size_t>(a)].block(m, m2);
          }
          blk.block(r * p, r2 * p, p, p) = cell;
        }
      }
      big.block(m * dim, m2 * dim, dim, dim) = blk;
      if (m2 > m) big.block(m2 * dim, m * dim, dim, dim) = blk.transpose();
    }
  }
  big *= grid.weight();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (big + big.transpose()));
  MixtureSpec spec;
  spec.eigenvalues.assign(es.eigenvalues().data(),
                          es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(),
            std::greater<double>());
  const double top = spec.eigenvalues.empty() ? 0.0 : spec.eigenvalues.front();
  for (double& l : spec.eigenvalues) {
    if (l < 0.0 && -l <= 1e-12 * std::max(top, 1.0)) l = 0.0;
    if (l < 0.0) l = 0.0;  // larger negatives would signal a broken kernel
  }
  return spec;
}

namespace detail {

inline std::vector<double> simulate_mixture(const MixtureSpec& spec, int reps,
                                            std::uint64_t seed) {
  if (spec.eigenvalues.empty()) throw DegenerateError("mixture: empty spectrum");
  if (reps < 1000) throw DimensionError("mixture: need reps >= 1000");
  std::vector<double> draws(static_cast<std::size_t>(reps));
  Rng rng(splitmix64(seed));
  for (int r = 0; r < reps; ++r) {
    double s = 0.0;
    for (double l : spec.eigenvalues) {
      const double z = rng.normal();
      s += l * z * z;
    }
    draws[static_cast<std::size_t>(r)] = s;
  }
  std::sort(draws.begin(), draws.end());
  return draws;
}

}  // namespace detail

/// Monte Carlo upper-alpha quantile of the weighted chi-square-one mixture
/// with the given spectrum. Deterministic given the seed.
inline double null_mixture_quantile(const MixtureSpec& spec, double alpha,
                                    int reps, std::uint64_t seed) {
  const auto draws = detail::simulate_mixture(spec, reps, seed);
  const double q = 1.0 - alpha;
  const std::size_t idx = static_cast<std::size_t>(std::clamp<long>(
      static_cast<long>(std::ceil(q * reps)) - 1, 0, reps - 1));
  return draws[idx];
}

/// Distribution-free (order-statistic) confidence interval for the same
/// Monte Carlo quantile at the given confidence level.
inline std::pair<double, double> null_mixture_quantile_ci(
    const MixtureSpec& spec, double alpha, int reps, std::uint64_t seed,
    double confidence) {
  const auto draws = detail::simulate_mixture(spec, reps, seed);
  const double q = 1.0 - alpha;
  const double z = norm_quantile(0.5 + 0.5 * confidence);
  const double center = q * reps;
  const double spread = z * std::sqrt(reps * q * (1.0 - q));
  const long lo_rank = std::clamp<long>(
      static_cast<long>(std::floor(center - spread)) - 1, 0, reps - 1);
  const long hi_rank =
      std::clamp<long>(static_cast<long>(std::ceil(center + spread)), 0, reps - 1);
  return {draws[static_cast<std::size_t>(lo_rank)],
          draws[static_cast<std::size_t>(hi_rank)]};
}

}  // namespace fglht
