#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fglht/rng.hpp"
#include "fglht/smoothing_spline.hpp"

using namespace fglht;
using Catch::Approx;

namespace {

// Dense reference for the fitted values and hat trace of one penalty: build
// R, Q, QtQ explicitly and solve with a full LU. Independent of the banded
// path under test.
struct DenseReference {
  Eigen::VectorXd fitted;
  double edf;

  DenseReference(const std::vector<double>& x, const std::vector<double>& y,
                 double lambda) {
    const int n = static_cast<int>(x.size());
    const int m = n - 2;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, m);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
    std::vector<double> h(static_cast<std::size_t>(n - 1));
    for (int i = 0; i + 1 < n; ++i) h[static_cast<std::size_t>(i)] = x[i + 1] - x[i];
    for (int j = 0; j < m; ++j) {
      q(j, j) = 1.0 / h[static_cast<std::size_t>(j)];
      q(j + 1, j) = -1.0 / h[static_cast<std::size_t>(j)] - 1.0 / h[static_cast<std::size_t>(j + 1)];
      q(j + 2, j) = 1.0 / h[static_cast<std::size_t>(j + 1)];
      r(j, j) = (h[static_cast<std::size_t>(j)] + h[static_cast<std::size_t>(j + 1)]) / 3.0;
      if (j + 1 < m) {
        r(j, j + 1) = h[static_cast<std::size_t>(j + 1)] / 6.0;
        r(j + 1, j) = r(j, j + 1);
      }
    }
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    const Eigen::MatrixXd a = r + lambda * q.transpose() * q;
    const Eigen::VectorXd gamma = a.fullPivLu().solve(q.transpose() * yv);
    fitted = yv - lambda * q * gamma;
    const Eigen::MatrixXd hat =
        Eigen::MatrixXd::Identity(n, n) -
        lambda * q * a.fullPivLu().solve(Eigen::MatrixXd(q.transpose()));
    edf = hat.trace();
  }
};

}  // namespace

TEST_CASE("banded solve matches a dense reference") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 8 + rng.uniform_int(20);
    std::vector<double> x, y;
    double t = 0.0;
    for (int i = 0; i < n; ++i) {
      t += 0.05 + rng.uniform();
      x.push_back(t);
      y.push_back(std::sin(t) + 0.3 * rng.normal());
    }
    for (double lambda : {1e-4, 0.05, 3.0}) {
      const detail::SplineBands bands(x, y);
      const detail::SplineSolve solve(bands, lambda);
      const DenseReference ref(x, y, lambda);
      REQUIRE(solve.edf == Approx(ref.edf).epsilon(1e-9));
      // fitted values via y - lambda Q gamma
      std::vector<double> fit(y);
      for (std::size_t j = 0; j < bands.m; ++j) {
        fit[j] -= lambda * bands.q0[j] * solve.gamma[j];
        fit[j + 1] -= lambda * bands.q1[j] * solve.gamma[j];
        fit[j + 2] -= lambda * bands.q2[j] * solve.gamma[j];
      }
      for (int i = 0; i < n; ++i) {
        REQUIRE(fit[static_cast<std::size_t>(i)] == Approx(ref.fitted(i)).margin(1e-9));
      }
      double rss = 0.0;
      for (int i = 0; i < n; ++i) {
        rss += std::pow(y[static_cast<std::size_t>(i)] - ref.fitted(i), 2);
      }
      REQUIRE(solve.rss == Approx(rss).margin(1e-9));
    }
  }
}

TEST_CASE("effective degrees of freedom shrink as the penalty grows") {
  std::vector<double> x, y;
  Rng rng(4);
  for (int i = 0; i < 25; ++i) {
    x.push_back(i / 24.0);
    y.push_back(std::cos(3.0 * x.back()) + 0.2 * rng.normal());
  }
  const detail::SplineBands bands(x, y);
  double prev = 1e300;
  for (double lambda : {1e-8, 1e-4, 1e-2, 1.0, 100.0}) {
    const detail::SplineSolve s(bands, lambda);
    REQUIRE(s.edf < prev + 1e-9);
    REQUIRE(s.edf >= 2.0 - 1e-6);  // never below a straight line
    prev = s.edf;
  }
}

TEST_CASE("GCV picks a near-interpolant for smooth noiseless data") {
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(i / 29.0);
    y.push_back(1.0 + 2.0 * x.back() + 0.5 * x.back() * x.back());
  }
  const SmoothingFit fit = fit_smoothing_spline(x, y);
  double rmse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    rmse += std::pow(fit.spline.y[i] - y[i], 2);
  }
  REQUIRE(std::sqrt(rmse / static_cast<double>(x.size())) < 1e-3);
}

TEST_CASE("spline evaluation reproduces knot values and extends constantly") {
  std::vector<double> x = {0.0, 0.4, 0.7, 1.0, 1.5};
  std::vector<double> y = {1.0, 2.0, 0.5, -1.0, 3.0};
  std::vector<double> tiny = {1e-10};
  const SmoothingFit fit = fit_smoothing_spline(x, y, &tiny);
  for (std::size_t i = 0; i < x.size(); ++i) {
    REQUIRE(fit.spline(x[i]) == Approx(fit.spline.y[i]).margin(1e-12));
  }
  REQUIRE(fit.spline(-5.0) == Approx(fit.spline.y.front()));
  REQUIRE(fit.spline(9.0) == Approx(fit.spline.y.back()));
}

TEST_CASE("spline input validation") {
  std::vector<double> x = {0.0, 0.5, 1.0};
  std::vector<double> y = {1.0, 2.0, 3.0};
  REQUIRE_THROWS_AS(fit_smoothing_spline(x, y), SizeError);
  std::vector<double> x4 = {0.0, 0.5, 0.5, 1.0};
  std::vector<double> y4 = {1.0, 2.0, 2.0, 3.0};
  REQUIRE_THROWS_AS(fit_smoothing_spline(x4, y4), DimensionError);
}

TEST_CASE("linear interpolation basics") {
  std::vector<double> x = {0.0, 1.0, 3.0};
  std::vector<double> y = {0.0, 2.0, -2.0};
  REQUIRE(linear_interp(x, y, 0.5) == Approx(1.0));
  REQUIRE(linear_interp(x, y, 2.0) == Approx(0.0));
  REQUIRE(linear_interp(x, y, -1.0) == Approx(0.0));
  REQUIRE(linear_interp(x, y, 99.0) == Approx(-2.0));
}
