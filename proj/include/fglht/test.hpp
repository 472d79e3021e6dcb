#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "fglht/chisq.hpp"
#include "fglht/error.hpp"
#include "fglht/gram.hpp"
#include "fglht/grid.hpp"
#include "fglht/hypothesis.hpp"
#include "fglht/moments.hpp"
#include "fglht/sample.hpp"

namespace fglht {

/// Global statistic: grid-summed trace of the between-group variation
/// matrix against the pooled inverse covariance,
///   (v/M) * sum_m tr[ B(t_m) pooled^{-1}(t_m) ],
///   B(t) = [C Mhat(t)]^T (C D C^T)^{-1} [C Mhat(t)],
/// with Mhat(t) the k x p matrix of group mean vectors. Nonnegative by
/// construction.
inline double glht_statistic(const std::vector<GroupMoments>& moments,
                             const PooledCovariance& pooled,
                             const Hypothesis& hyp, const Grid& grid) {
  const int k = static_cast<int>(moments.size());
  const int p = moments.front().p;
  const int points = moments.front().points;
  Eigen::MatrixXd mhat(k, p);
  double acc = 0.0;
  for (int m = 0; m < points; ++m) {
    for (int a = 0; a < k; ++a) mhat.row(a) = moments[a].mean_at(m);
    const Eigen::MatrixXd u = hyp.contrast() * mhat;  // q x p
    const auto& pt = pooled.at(m);
    if (pt.zero) {
      if (u.cwiseAbs().maxCoeff() > 0.0) {
        throw SingularityError(
            "between-group variation at a zero-variation grid point t = " +
            std::to_string(grid.point(m)));
      }
      continue;
    }
    acc += (hyp.gram_inverse() * (u * pt.inverse * u.transpose())).trace();
  }
  return std::max(0.0, grid.weight() * acc);
}

/// Second and third cumulant estimates of the null limit, assembled from
/// the trace functionals with the hypothesis weight matrix.
struct CumulantEstimates {
  double k2 = 0.0;
  double k3 = 0.0;
};

inline CumulantEstimates cumulant_estimates(const TraceEstimates& tr,
                                            const Hypothesis& hyp) {
  const int k = tr.k;
  if (k != hyp.groups()) {
    throw DimensionError("cumulant_estimates: group count mismatch");
  }
  CumulantEstimates c;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const double hab = hyp.weight(a, b);
      c.k2 += 2.0 * hab * hab * tr.pair(a, b);
      for (int g = 0; g < k; ++g) {
        c.k3 += 8.0 * hab * hyp.weight(b, g) * hyp.weight(g, a) *
                tr.triple_at(a, b, g);
      }
    }
  }
  if (!(c.k2 > 0.0) || !(c.k3 > 0.0)) {
    throw DegenerateError(
        "cumulant estimates are not positive; data are effectively noiseless");
  }
  return c;
}

/// Shifted-and-scaled chi-square law matched to the first three cumulants:
/// shift + scale * chisq(df).
struct ChiSquareApprox {
  double shift = 0.0;   // may be negative
  double scale = 0.0;   // > 0
  double df = 0.0;      // > 0, generally non-integer
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
};

inline ChiSquareApprox chisq_params(double k1, double k2, double k3) {
  if (!(k2 > 0.0) || !(k3 > 0.0)) {
    throw DegenerateError("chisq_params: cumulants must be positive");
  }
  ChiSquareApprox a;
  a.k1 = k1;
  a.k2 = k2;
  a.k3 = k3;
  a.scale = k3 / (4.0 * k2);
  a.df = 8.0 * k2 * k2 * k2 / (k3 * k3);
  a.shift = k1 - 2.0 * k2 * k2 / k3;
  return a;
}

/// Finite-sample adjustment >= 1 applied to the statistic before the
/// approximate null law; shrinks to 1 as group sizes grow.
inline double adjustment_coefficient(const TraceEstimates& tr,
                                     const Hypothesis& hyp,
                                     const std::vector<int>& sizes) {
  const int k = tr.k;
  if (k != static_cast<int>(sizes.size())) {
    throw DimensionError("adjustment_coefficient: size list mismatch");
  }
  double c = 1.0;
  for (int a = 0; a < k; ++a) {
    const double na = sizes[static_cast<std::size_t>(a)];
    if (na <= 3) {
      throw SizeError("adjustment requires n >= 4 in every group; group " +
                      std::to_string(a + 1) + " has n = " +
                      std::to_string(sizes[static_cast<std::size_t>(a)]));
    }
    const double haa = hyp.weight(a, a);
    c += haa * haa * (na + 1.0) / (na * (na - 3.0)) * tr.pair(a, a);
  }
  return c;
}

/// Upper-tail p-value of the matched law for an (already adjusted)
/// statistic value; arguments left of the shift get probability one, since
/// the approximating law carries no mass there.
inline double approx_p_value(double adjusted_statistic, const ChiSquareApprox& a) {
  const double x = (adjusted_statistic - a.shift) / a.scale;
  if (x < 0.0) return 1.0;
  return ChiSquare(a.df).sf(x);
}

struct TestOptions {
  bool adjusted = true;
  std::vector<double> alphas = {0.05};
};

struct TestDiagnostics {
  int ridge_events = 0;
  int zero_points = 0;
  int grid_points = 0;
  double grid_volume = 0.0;
  int groups = 0;
  int components = 0;
  std::vector<int> sizes;
};

/// Full decision report of the global test.
struct TestReport {
  double statistic = 0.0;    // T
  double adjustment = 1.0;   // c >= 1 (1 when adjustment disabled)
  bool adjusted = true;
  ChiSquareApprox approx;
  double p_value = 1.0;
  std::map<double, bool> reject_at;
  TestDiagnostics diagnostics;
};

/// Runs the complete pipeline: moments, pooled covariance, statistic,
/// residual Gram, cumulants, matched law, adjustment and decision.
inline TestReport run_test(const SampleSet& data, const Eigen::MatrixXd& contrast,
                           const TestOptions& options = {}) {
  const Hypothesis hyp(contrast, data.sizes());
  std::vector<GroupMoments> moments;
  moments.reserve(data.groups().size());
  for (const auto& g : data.groups()) moments.push_back(compute_moments(g));

  const PooledCovariance pooled = build_pooled(moments, hyp, data.grid());
  const double stat = glht_statistic(moments, pooled, hyp, data.grid());
  const ResidualGram gram = residual_gram(moments, pooled, data.grid());
  const TraceEstimates traces = trace_estimates(gram);
  const CumulantEstimates cum = cumulant_estimates(traces, hyp);

  TestReport rep;
  rep.statistic = stat;
  rep.adjusted = options.adjusted;
  rep.adjustment = options.adjusted
                       ? adjustment_coefficient(traces, hyp, data.sizes())
                       : 1.0;
  rep.approx = chisq_params(
      static_cast<double>(data.components()) * data.grid().volume(), cum.k2,
      cum.k3);
  rep.p_value = approx_p_value(stat / rep.adjustment, rep.approx);
  for (double a : options.alphas) rep.reject_at[a] = rep.p_value < a;

  rep.diagnostics.ridge_events = pooled.ridge_events;
  rep.diagnostics.zero_points = pooled.zero_points;
  rep.diagnostics.grid_points = data.grid().size();
  rep.diagnostics.grid_volume = data.grid().volume();
  rep.diagnostics.groups = data.group_count();
  rep.diagnostics.components = data.components();
  rep.diagnostics.sizes = data.sizes();
  return rep;
}

}  // namespace fglht
