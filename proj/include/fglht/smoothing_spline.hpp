#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "fglht/error.hpp"

namespace fglht {

/// Natural cubic spline through knots x with values y and second
/// derivatives y2 (zero at both ends). Evaluation outside [x.front(),
/// x.back()] continues the boundary value as a constant.
struct CubicSpline {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y2;

  double operator()(double t) const {
    const std::size_t n = x.size();
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(x.begin(), x.end(), t) - x.begin());
    if (hi == 0) hi = 1;
    if (hi >= n) hi = n - 1;
    const std::size_t lo = hi - 1;
    const double h = x[hi] - x[lo];
    const double A = (x[hi] - t) / h;
    const double B = (t - x[lo]) / h;
    return A * y[lo] + B * y[hi] +
           ((A * A * A - A) * y2[lo] + (B * B * B - B) * y2[hi]) * h * h / 6.0;
  }
};

/// Result of a penalized fit: the spline, the chosen penalty, its GCV score
/// and the effective degrees of freedom tr(H).
struct SmoothingFit {
  CubicSpline spline;
  double lambda = 0.0;
  double gcv = 0.0;
  double edf = 0.0;
};

namespace detail {

// Reinsch-form workspace for one knot sequence: the tridiagonal R, the
// pentadiagonal QtQ and the projected data Qty, so that for each penalty
// only a banded solve is needed.
struct SplineBands {
  std::size_t n = 0;  // knots
  std::size_t m = 0;  // interior knots = n - 2
  std::vector<double> h;                       // n-1 gaps
  std::vector<double> r0, r1;                  // R diag / first off-diag
  std::vector<double> q0, q1, q2;              // per-column entries of Q
  std::vector<double> s0, s1, s2;              // QtQ diag / off1 / off2
  std::vector<double> qty;

  SplineBands(const std::vector<double>& x, const std::vector<double>& y) {
    n = x.size();
    m = n - 2;
    h.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];
    r0.resize(m);
    r1.assign(m > 1 ? m - 1 : 0, 0.0);
    q0.resize(m);
    q1.resize(m);
    q2.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      r0[j] = (h[j] + h[j + 1]) / 3.0;
      if (j + 1 < m) r1[j] = h[j + 1] / 6.0;
      q0[j] = 1.0 / h[j];
      q1[j] = -1.0 / h[j] - 1.0 / h[j + 1];
      q2[j] = 1.0 / h[j + 1];
    }
    s0.resize(m);
    s1.assign(m > 1 ? m - 1 : 0, 0.0);
    s2.assign(m > 2 ? m - 2 : 0, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      s0[j] = q0[j] * q0[j] + q1[j] * q1[j] + q2[j] * q2[j];
      if (j + 1 < m) s1[j] = q1[j] * q0[j + 1] + q2[j] * q1[j + 1];
      if (j + 2 < m) s2[j] = q2[j] * q0[j + 2];
    }
    qty.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      qty[j] = q0[j] * y[j] + q1[j] * y[j + 1] + q2[j] * y[j + 2];
    }
  }
};

// One penalized solve: gamma = (R + lambda QtQ)^{-1} Qty via banded LDL^T
// (bandwidth 2), fitted residual r = lambda Q gamma, and tr(H) from the
// central bands of the inverse (bottom-up recursion). Everything is O(n).
struct SplineSolve {
  std::vector<double> gamma;
  double rss = 0.0;
  double edf = 0.0;

  SplineSolve(const SplineBands& b, double lambda) {
    const std::size_t m = b.m;
    std::vector<double> d(m), l1(m, 0.0), l2(m, 0.0);
    const auto a0 = [&](std::size_t i) { return b.r0[i] + lambda * b.s0[i]; };
    const auto a1 = [&](std::size_t i) { return b.r1[i] + lambda * b.s1[i]; };
    const auto a2 = [&](std::size_t i) { return lambda * b.s2[i]; };

    for (std::size_t i = 0; i < m; ++i) {
      double diag = a0(i);
      if (i >= 2) {
        l2[i] = a2(i - 2) / d[i - 2];
        diag -= l2[i] * l2[i] * d[i - 2];
      }
      if (i >= 1) {
        double v = a1(i - 1);
        if (i >= 2) v -= l2[i] * d[i - 2] * l1[i - 1];
        l1[i] = v / d[i - 1];
        diag -= l1[i] * l1[i] * d[i - 1];
      }
      if (!(diag > 0.0)) throw Error("smoothing spline: singular system");
      d[i] = diag;
    }

    // solve
    gamma.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      double v = b.qty[i];
      if (i >= 1) v -= l1[i] * gamma[i - 1];
      if (i >= 2) v -= l2[i] * gamma[i - 2];
      gamma[i] = v;
    }
    for (std::size_t i = 0; i < m; ++i) gamma[i] /= d[i];
    for (std::size_t ii = m; ii-- > 0;) {
      if (ii + 1 < m) gamma[ii] -= l1[ii + 1] * gamma[ii + 1];
      if (ii + 2 < m) gamma[ii] -= l2[ii + 2] * gamma[ii + 2];
    }

    // residual y - g = lambda * Q gamma
    std::vector<double> r(b.n, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      r[j] += b.q0[j] * gamma[j];
      r[j + 1] += b.q1[j] * gamma[j];
      r[j + 2] += b.q2[j] * gamma[j];
    }
    rss = 0.0;
    for (double& v : r) {
      v *= lambda;
      rss += v * v;
    }

    // central bands of (R + lambda QtQ)^{-1}
    std::vector<double> bd(m), b1(m, 0.0), b2(m, 0.0);
    for (std::size_t ii = m; ii-- > 0;) {
      const double f1 = (ii + 1 < m) ? l1[ii + 1] : 0.0;
      const double f2 = (ii + 2 < m) ? l2[ii + 2] : 0.0;
      const double bn1 = (ii + 1 < m) ? bd[ii + 1] : 0.0;
      const double bn12 = (ii + 1 < m) ? b1[ii + 1] : 0.0;
      const double bn2 = (ii + 2 < m) ? bd[ii + 2] : 0.0;
      b1[ii] = -(f1 * bn1 + f2 * bn12);
      b2[ii] = -(f1 * bn12 + f2 * bn2);
      bd[ii] = 1.0 / d[ii] - f1 * b1[ii] - f2 * b2[ii];
    }
    double tr = 0.0;
    for (std::size_t j = 0; j < m; ++j) tr += bd[j] * b.s0[j];
    for (std::size_t j = 0; j + 1 < m; ++j) tr += 2.0 * b1[j] * b.s1[j];
    for (std::size_t j = 0; j + 2 < m; ++j) tr += 2.0 * b2[j] * b.s2[j];
    edf = static_cast<double>(b.n) - lambda * tr;
  }
};

}  // namespace detail

/// Default penalty candidates: a fixed log-spaced ladder around the usual
/// scale-free reference tr(R)/tr(QtQ), spanning spar in [-1.5, 1.5] on the
/// 256^(3 spar - 1) parametrization.
inline std::vector<double> smoothing_lambda_ladder(const detail::SplineBands& b) {
  double tr_r = 0.0, tr_s = 0.0;
  for (std::size_t j = 0; j < b.m; ++j) {
    tr_r += b.r0[j];
    tr_s += b.s0[j];
  }
  const double ref = tr_r / tr_s;
  std::vector<double> out;
  const int count = 31;
  for (int i = 0; i < count; ++i) {
    const double spar = -1.5 + 3.0 * static_cast<double>(i) / (count - 1);
    out.push_back(ref * std::pow(256.0, 3.0 * spar - 1.0));
  }
  return out;
}

/// Fits a natural cubic smoothing spline to (x, y), x strictly increasing,
/// choosing the roughness penalty by generalized cross-validation over a
/// fixed candidate ladder. Needs at least 4 points.
inline SmoothingFit fit_smoothing_spline(const std::vector<double>& x,
                                         const std::vector<double>& y,
                                         const std::vector<double>* lambdas = nullptr) {
  if (x.size() != y.size()) throw DimensionError("smoothing spline: size mismatch");
  if (x.size() < 4) throw SizeError("smoothing spline: need at least 4 points");
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i] < x[i + 1])) {
      throw DimensionError("smoothing spline: x must be strictly increasing");
    }
  }

  const detail::SplineBands bands(x, y);
  const std::vector<double> ladder =
      lambdas ? *lambdas : smoothing_lambda_ladder(bands);

  const double n = static_cast<double>(x.size());
  double best_lambda = ladder.front();
  double best_gcv = std::numeric_limits<double>::infinity();
  double best_edf = n;
  for (double lam : ladder) {
    const detail::SplineSolve s(bands, lam);
    const double denom = n - s.edf;
    const double gcv = denom > 1e-12 ? n * s.rss / (denom * denom)
                                     : std::numeric_limits<double>::infinity();
    if (gcv < best_gcv) {
      best_gcv = gcv;
      best_lambda = lam;
      best_edf = s.edf;
    }
  }

  const detail::SplineSolve s(bands, best_lambda);
  SmoothingFit fit;
  fit.lambda = best_lambda;
  fit.gcv = best_gcv;
  fit.edf = best_edf;
  fit.spline.x = x;
  fit.spline.y.resize(x.size());
  {
    // g = y - lambda Q gamma
    std::vector<double> r(x.size(), 0.0);
    for (std::size_t j = 0; j < bands.m; ++j) {
      r[j] += bands.q0[j] * s.gamma[j];
      r[j + 1] += bands.q1[j] * s.gamma[j];
      r[j + 2] += bands.q2[j] * s.gamma[j];
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      fit.spline.y[i] = y[i] - best_lambda * r[i];
    }
  }
  fit.spline.y2.assign(x.size(), 0.0);  // natural ends
  for (std::size_t j = 0; j < bands.m; ++j) fit.spline.y2[j + 1] = s.gamma[j];
  return fit;
}

/// Piecewise-linear interpolant with constant continuation outside the
/// observed range; x strictly increasing.
inline double linear_interp(const std::vector<double>& x,
                            const std::vector<double>& y, double t) {
  if (t <= x.front()) return y.front();
  if (t >= x.back()) return y.back();
  const std::size_t hi = static_cast<std::size_t>(
      std::upper_bound(x.begin(), x.end(), t) - x.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - x[lo]) / (x[hi] - x[lo]);
  return (1.0 - w) * y[lo] + w * y[hi];
}

}  // namespace fglht
