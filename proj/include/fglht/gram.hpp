#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "fglht/error.hpp"
#include "fglht/grid.hpp"
#include "fglht/moments.hpp"

namespace fglht {

/// Gram matrix of the standardized residual curves: entry (i, j) of block
/// (a, b) is the grid-summed inner product of curve i of group a with curve
/// j of group b through the pooled inverse covariance,
///   (v/M) * sum_m  z_ai(t_m)^T pooled^{-1}(t_m) z_bj(t_m).
/// Every trace functional of the standardized covariance estimators reduces
/// to products of these blocks.
struct ResidualGram {
  Eigen::MatrixXd full;       // n x n, groups stacked in order
  std::vector<int> offsets;   // size k+1

  int groups() const { return static_cast<int>(offsets.size()) - 1; }
  int group_size(int a) const { return offsets[a + 1] - offsets[a]; }
  auto block(int a, int b) const {
    return full.block(offsets[a], offsets[b], group_size(a), group_size(b));
  }
};

/// Builds the residual Gram matrix. At exactly-zero pooled points the data
/// must carry no residual mass; such points contribute nothing.
inline ResidualGram residual_gram(const std::vector<GroupMoments>& moments,
                                  const PooledCovariance& pooled,
                                  const Grid& grid) {
  const int k = static_cast<int>(moments.size());
  const int p = moments.front().p;
  const int points = moments.front().points;
  ResidualGram gram;
  gram.offsets.assign(1, 0);
  for (const auto& mo : moments) gram.offsets.push_back(gram.offsets.back() + mo.n);
  const int n = gram.offsets.back();

  // Stack standardized residual scores; then the Gram matrix is one product.
  Eigen::MatrixXd scores(n, static_cast<Eigen::Index>(p) * points);
  const double root_w = std::sqrt(grid.weight());
  for (int m = 0; m < points; ++m) {
    const auto& pt = pooled.at(m);
    for (int a = 0; a < k; ++a) {
      const auto block = moments[a].residuals_at(m);
      auto dst = scores.block(gram.offsets[a], static_cast<Eigen::Index>(m) * p,
                              moments[a].n, p);
      if (pt.zero) {
        if (block.cwiseAbs().maxCoeff() > 0.0) {
          throw SingularityError(
              "residual mass at a zero-variation grid point t = " +
              std::to_string(grid.point(m)));
        }
        dst.setZero();
      } else {
        dst = root_w * block * pt.inv_sqrt;
      }
    }
  }
  gram.full.noalias() = scores * scores.transpose();
  return gram;
}

/// All trace functionals of the standardized per-group covariance
/// estimators: singles, ordered pairs and ordered triples. Values carry the
/// full index symmetry, so only canonical combinations are computed.
struct TraceEstimates {
  int k = 0;
  Eigen::VectorXd single;  // k
  Eigen::MatrixXd pair;    // k x k
  std::vector<double> triple;  // k^3, index (a*k + b)*k + c

  double triple_at(int a, int b, int c) const {
    return triple[static_cast<std::size_t>((a * k + b) * k + c)];
  }
};

inline TraceEstimates trace_estimates(const ResidualGram& gram) {
  const int k = gram.groups();
  TraceEstimates tr;
  tr.k = k;
  tr.single.resize(k);
  tr.pair.resize(k, k);
  tr.triple.assign(static_cast<std::size_t>(k) * k * k, 0.0);

  std::vector<double> nn(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) {
    const double na = gram.group_size(a);
    if (na < 2) throw SizeError("trace_estimates: group needs n >= 2");
    nn[static_cast<std::size_t>(a)] = na * (na - 1.0);
  }

  for (int a = 0; a < k; ++a) {
    tr.single(a) = gram.block(a, a).trace() / nn[static_cast<std::size_t>(a)];
    for (int b = a; b < k; ++b) {
      const double v = gram.block(a, b).squaredNorm() /
                       (nn[static_cast<std::size_t>(a)] * nn[static_cast<std::size_t>(b)]);
      tr.pair(a, b) = v;
      tr.pair(b, a) = v;
    }
  }

  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      const Eigen::MatrixXd left = gram.block(a, b);
      for (int c = b; c < k; ++c) {
        const double raw =
            ((left * gram.block(b, c)).cwiseProduct(gram.block(a, c))).sum();
        const double v = raw / (nn[static_cast<std::size_t>(a)] *
                                nn[static_cast<std::size_t>(b)] *
                                nn[static_cast<std::size_t>(c)]);
        const std::array<std::array<int, 3>, 6> perms = {{{a, b, c},
                                                          {a, c, b},
                                                          {b, a, c},
                                                          {b, c, a},
                                                          {c, a, b},
                                                          {c, b, a}}};
        for (const auto& q : perms) {
          tr.triple[static_cast<std::size_t>((q[0] * k + q[1]) * k + q[2])] = v;
        }
      }
    }
  }
  return tr;
}

}  // namespace fglht
