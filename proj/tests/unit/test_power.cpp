#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "fglht/chisq.hpp"
#include "fglht/designs.hpp"
#include "fglht/power.hpp"

using namespace fglht;
using Catch::Approx;

namespace {

PowerInput design_input(double delta, double total_n, double alpha) {
  FourierDesign d;
  d.rho = 0.5;
  d.points = 10;
  d.shift = delta;
  PowerInput in;
  in.grid = d.grid();
  in.contrast = equal_means_contrast(3);
  in.alpha = alpha;
  in.total_n = total_n;
  const double tau[3] = {100.0 / 380.0, 140.0 / 380.0, 140.0 / 380.0};
  for (int a = 0; a < 3; ++a) {
    in.mean.push_back(design_mean(d, a));
    in.tau.push_back(tau[a]);
    in.cov.push_back(population_covariance(d, a));
  }
  return in;
}

}  // namespace

TEST_CASE("power equals the level when the contrast annihilates the means") {
  const PowerInput in = design_input(0.0, 380.0, 0.05);
  REQUIRE(asymptotic_power(in) == Approx(0.05).epsilon(1e-10));
  PowerInput fd = in;
  fd.finite_df = true;
  REQUIRE(asymptotic_power(fd) == Approx(0.05).epsilon(1e-8));
}

TEST_CASE("power increases with the sample size") {
  const double p1 = asymptotic_power(design_input(0.05, 200.0, 0.05));
  const double p2 = asymptotic_power(design_input(0.05, 400.0, 0.05));
  const double p3 = asymptotic_power(design_input(0.05, 800.0, 0.05));
  REQUIRE(p1 > 0.05);
  REQUIRE(p2 > p1);
  REQUIRE(p3 > p2);
}

TEST_CASE("power matches a scalar evaluation on a univariate two-group case") {
  // p=1, M=2 grid on [0,1], flat unit covariances, mean gap c in group 2
  const int M = 2;
  Grid grid(0.0, 1.0, M);
  PowerInput in;
  in.grid = grid;
  Eigen::MatrixXd g(1, 2);
  g << 1, -1;
  in.contrast = g;
  in.alpha = 0.05;
  in.total_n = 100.0;
  in.tau = {0.5, 0.5};
  const double gap = 0.15;
  in.mean.push_back(Eigen::MatrixXd::Zero(1, M));
  in.mean.push_back(Eigen::MatrixXd::Constant(1, M, gap));
  for (int a = 0; a < 2; ++a) {
    DenseCovSurface s;
    s.p = 1;
    s.points = M;
    s.mat = Eigen::MatrixXd::Identity(M, M);  // white-ish: unit diag, zero off
    in.cov.push_back(s);
  }
  // by hand: D* = diag(2,2), C D* C^T = 4, W* = [[1,-1],[-1,1]]/4, pooled
  // covariance = w11/tau + w22/tau = 1 at every point, so the drift
  // integrand is the constant (0,gap) W* (0,gap)^T = gap^2/4.
  Eigen::Matrix2d dstar = Eigen::Vector2d(2.0, 2.0).asDiagonal();
  const double gram = (g * dstar * g.transpose())(0, 0);  // 4
  const Eigen::Matrix2d wstar = g.transpose() * g / gram;
  Eigen::MatrixXd mcol(2, 1);
  mcol << 0.0, gap;
  const double integrand = (mcol.transpose() * wstar * mcol)(0, 0) / 1.0;
  const double drift = in.total_n * integrand;  // integral of a constant over v=1
  // variance: standardized surfaces are (1/tau) * I / pooled = 2 I; pair
  // trace per (a,b) = w^2 sum_m tr = (1/M)^2 * M * 4 = 4/M... compute:
  const double w = grid.weight();
  const double pair = w * w * M * (2.0 * 2.0);
  double var = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      var += 2.0 * wstar(a, b) * wstar(a, b) * pair;
    }
  }
  const double expected = norm_cdf(-norm_quantile(0.95) + drift / std::sqrt(var));
  REQUIRE(asymptotic_power(in) == Approx(expected).epsilon(1e-10));
}

TEST_CASE("power input validation") {
  PowerInput in = design_input(0.1, 100.0, 0.05);
  in.tau = {0.5, 0.4, 0.2};  // sums to 1.1
  REQUIRE_THROWS_AS(asymptotic_power(in), DimensionError);
  PowerInput bad_alpha = design_input(0.1, 100.0, 0.05);
  bad_alpha.alpha = 1.5;
  REQUIRE_THROWS_AS(asymptotic_power(bad_alpha), DimensionError);
}

TEST_CASE("finite-df form behaves like the normal form for large df") {
  PowerInput in = design_input(0.04, 500.0, 0.05);
  const double normal_form = asymptotic_power(in);
  in.finite_df = true;
  const double chi_form = asymptotic_power(in);
  REQUIRE(std::fabs(normal_form - chi_form) < 0.05);
  REQUIRE(chi_form > 0.05);
}
