#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "fglht/error.hpp"

namespace fglht {

namespace detail {

// Regularized lower incomplete gamma by power series; valid for x < a+1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 1000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma by modified Lentz continued fraction;
// valid for x >= a+1.
inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-17) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a,x).
inline double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

/// Regularized upper incomplete gamma Q(a,x) = 1 - P(a,x).
inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

/// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Standard normal survival function.
inline double norm_sf(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

/// Standard normal quantile. Rational initial guess (Acklam) refined by two
/// Halley steps against erfc, good to full double precision on (0,1).
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("norm_quantile: p outside (0,1)");
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    const double e = norm_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

/// Chi-square law with (possibly non-integer) degrees of freedom d > 0,
/// i.e. gamma(shape d/2, scale 2).
class ChiSquare {
 public:
  explicit ChiSquare(double df) : df_(df) {
    if (!(df > 0.0) || !std::isfinite(df)) {
      throw Error("ChiSquare: df must be positive and finite");
    }
  }

  double df() const { return df_; }

  double cdf(double x) const { return gamma_p(0.5 * df_, 0.5 * x); }

  double sf(double x) const { return gamma_q(0.5 * df_, 0.5 * x); }

  double pdf(double x) const {
    if (x <= 0.0) return 0.0;
    const double h = 0.5 * df_;
    return std::exp((h - 1.0) * std::log(x) - 0.5 * x - h * M_LN2 -
                    std::lgamma(h));
  }

  /// Inverse CDF via bracketed Newton with bisection fallback, converged to
  /// ~1e-12 relative. For p > 1/2 the iteration runs on the survival
  /// function, keeping upper-tail quantiles accurate.
  double quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("ChiSquare::quantile: p outside [0,1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return std::numeric_limits<double>::infinity();

    const bool upper = p > 0.5;
    const double target = upper ? 1.0 - p : p;  // tail probability to match
    // Wilson-Hilferty starting point.
    const double z = norm_quantile(p);
    const double t = 1.0 - 2.0 / (9.0 * df_) + z * std::sqrt(2.0 / (9.0 * df_));
    double x = df_ * t * t * t;
    if (!(x > 0.0) || !std::isfinite(x)) x = df_;

    // Establish a bracket [lo, hi] containing the solution. The hi test runs
    // on the survival function in the upper branch to dodge cancellation.
    double lo = 0.0;
    double hi = std::max(x, df_) * 2.0 + 10.0;
    while (upper ? sf(hi) > target : cdf(hi) < p) hi *= 2.0;
    x = std::clamp(x, 1e-300, hi);

    for (int it = 0; it < 200; ++it) {
      const double err = upper ? (target - sf(x)) : (cdf(x) - target);
      if (err > 0.0) {
        hi = x;
      } else if (err < 0.0) {
        lo = x;
      } else {
        return x;
      }
      const double dens = pdf(x);
      double step = dens > 0.0 ? -err / dens : 0.0;
      double next = x + step;
      if (!(next > lo && next < hi) || dens <= 0.0) {
        next = 0.5 * (lo + hi);  // bisection fallback
      }
      if (std::fabs(next - x) <= 1e-13 * std::max(1.0, std::fabs(x))) {
        return next;
      }
      x = next;
    }
    return x;
  }

  /// Upper 100*alpha percentile.
  double upper_quantile(double alpha) const { return quantile(1.0 - alpha); }

 private:
  double df_;
};

}  // namespace fglht
