#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "fglht/surface.hpp"
#include "fglht/test.hpp"
#include "test_util.hpp"

using namespace fglht;
using Catch::Approx;

namespace {

struct Pipeline {
  Hypothesis hyp;
  std::vector<GroupMoments> moments;
  PooledCovariance pooled;
  ResidualGram gram;
  TraceEstimates traces;

  Pipeline(const SampleSet& set, const Eigen::MatrixXd& g)
      : hyp(g, set.sizes()),
        moments([&] {
          std::vector<GroupMoments> mo;
          for (const auto& gs : set.groups()) mo.push_back(compute_moments(gs));
          return mo;
        }()),
        pooled(build_pooled(moments, hyp, set.grid())),
        gram(residual_gram(moments, pooled, set.grid())),
        traces(trace_estimates(gram)) {}
};

}  // namespace

TEST_CASE("statistic vanishes when group means coincide") {
  // group 2 holds the same curves as group 1 in reverse order: equal means.
  Rng rng(51);
  const SampleSet base = testutil::random_sampleset(rng, 2, 2, 6, 6, 6);
  Eigen::MatrixXd flipped = base.group(0).curves().colwise().reverse();
  std::vector<GroupSample> groups = {base.group(0),
                                     GroupSample("b", 2, 6, flipped)};
  const SampleSet set(base.grid(), std::move(groups));
  Eigen::MatrixXd g(1, 2);
  g << 1, -1;
  const Pipeline pl(set, g);
  REQUIRE(glht_statistic(pl.moments, pl.pooled, pl.hyp, set.grid()) < 1e-18);
}

TEST_CASE("statistic matches scalar arithmetic on the two-point case") {
  Grid grid(0.0, 1.0, 2);
  Eigen::MatrixXd c1(3, 2), c2(3, 2);
  c1 << 0, 0, 1, 1, 2, 2;
  c2 << 3, 3, 4, 4, 5, 5;
  std::vector<GroupSample> gs;
  gs.emplace_back("a", 1, 2, c1);
  gs.emplace_back("b", 1, 2, c2);
  const SampleSet set(grid, std::move(gs));
  Eigen::MatrixXd g(1, 2);
  g << 1, -1;
  const Pipeline pl(set, g);
  // by hand: means 1 and 4, var 1 in each group at both points;
  // gram = (1/n1 + 1/n2)^-1 = 3/2, pooled = 1.5/3 + 1.5/3 = 1,
  // per-point trace = (1-4)^2 * 1.5 = 13.5, weight = 1/2 over 2 points.
  REQUIRE(glht_statistic(pl.moments, pl.pooled, pl.hyp, grid) == Approx(13.5));
}

TEST_CASE("statistic is invariant under contrast row mixing") {
  Rng rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const SampleSet set = testutil::random_sampleset(rng, 3, 2, 8, 5, 9);
    const Eigen::MatrixXd g = testutil::random_contrast(rng, 3);
    const Eigen::MatrixXd p =
        testutil::random_nonsingular(rng, static_cast<int>(g.rows()));
    const Pipeline a(set, g), b(set, p * g);
    const double ta = glht_statistic(a.moments, a.pooled, a.hyp, set.grid());
    const double tb = glht_statistic(b.moments, b.pooled, b.hyp, set.grid());
    REQUIRE(testutil::rel_err(ta, tb) < 1e-8);
  }
}

TEST_CASE("cumulant estimates need positive traces") {
  ResidualGram gram;
  gram.full = Eigen::MatrixXd::Zero(8, 8);
  gram.offsets = {0, 4, 8};
  Eigen::MatrixXd g(1, 2);
  g << 1, -1;
  const Hypothesis hyp(g, {4, 4});
  REQUIRE_THROWS_AS(cumulant_estimates(trace_estimates(gram), hyp), DegenerateError);
}

TEST_CASE("cumulant estimates match a plain triple loop") {
  Rng rng(53);
  const SampleSet set = testutil::random_sampleset(rng, 3, 2, 6, 4, 8);
  const Eigen::MatrixXd g = equal_means_contrast(3);
  const Pipeline pl(set, g);
  const CumulantEstimates cum = cumulant_estimates(pl.traces, pl.hyp);
  double k2 = 0.0, k3 = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      k2 += 2.0 * pl.hyp.weight(a, b) * pl.hyp.weight(a, b) * pl.traces.pair(a, b);
      for (int c = 0; c < 3; ++c) {
        k3 += 8.0 * pl.hyp.weight(a, b) * pl.hyp.weight(b, c) *
              pl.hyp.weight(c, a) * pl.traces.triple_at(a, b, c);
      }
    }
  }
  REQUIRE(cum.k2 == Approx(k2).epsilon(1e-12));
  REQUIRE(cum.k3 == Approx(k3).epsilon(1e-12));
  REQUIRE(cum.k2 > 0.0);
}

TEST_CASE("matched chi-square parameters from the defining algebra") {
  const ChiSquareApprox a = chisq_params(6.0, 8.0, 32.0);
  REQUIRE(a.scale == Approx(1.0));
  REQUIRE(a.df == Approx(4.0));
  REQUIRE(a.shift == Approx(2.0));

  // exact chi-square shape: k2 = 2d, k3 = 8d reproduces scale 1, df d
  for (double d : {0.7, 3.0, 41.0}) {
    const ChiSquareApprox e = chisq_params(9.0, 2.0 * d, 8.0 * d);
    REQUIRE(e.scale == Approx(1.0));
    REQUIRE(e.df == Approx(d));
    REQUIRE(e.shift == Approx(9.0 - d));
  }

  // reconstruction: 2 scale^2 df = k2 and 8 scale^3 df = k3
  Rng rng(54);
  for (int i = 0; i < 25; ++i) {
    const double k2 = 0.1 + 5.0 * rng.uniform();
    const double k3 = 0.1 + 5.0 * rng.uniform();
    const ChiSquareApprox e = chisq_params(3.0, k2, k3);
    REQUIRE(testutil::rel_err(2.0 * e.scale * e.scale * e.df, k2) < 1e-10);
    REQUIRE(testutil::rel_err(8.0 * std::pow(e.scale, 3) * e.df, k3) < 1e-10);
  }
  REQUIRE_THROWS_AS(chisq_params(1.0, -1.0, 2.0), DegenerateError);
}

TEST_CASE("adjustment coefficient from the defining sum") {
  Rng rng(55);
  const SampleSet set = testutil::random_sampleset(rng, 2, 2, 5, 20, 20);
  Eigen::MatrixXd g(1, 2);
  g << 1, -1;
  Pipeline pl(set, g);

  // zero pair traces force exactly one
  TraceEstimates zero = pl.traces;
  zero.pair.setZero();
  REQUIRE(adjustment_coefficient(zero, pl.hyp, set.sizes()) == Approx(1.0));

  // hand value: two groups with weight 10, n = 20, pair trace 0.01 each
  double manual = 1.0;
  for (int a = 0; a < 2; ++a) {
    manual += 100.0 * (20.0 + 1.0) / (20.0 * (20.0 - 3.0)) * 0.01;
  }
  REQUIRE(manual == Approx(1.1235294117647059).epsilon(1e-12));

  // small groups are refused by name
  try {
    adjustment_coefficient(pl.traces, pl.hyp, {20, 3});
    FAIL("expected a size error");
  } catch (const SizeError& e) {
    REQUIRE(std::string(e.what()).find("group 2") != std::string::npos);
  }
}

TEST_CASE("adjustment matches an independent surface-based evaluation") {
  Rng rng(56);
  const SampleSet set = testutil::random_sampleset(rng, 2, 2, 6, 8, 12);
  Eigen::MatrixXd g(1, 2);
  g << 1, -1;
  const Pipeline pl(set, g);
  const double c = adjustment_coefficient(pl.traces, pl.hyp, set.sizes());

  double manual = 1.0;
  for (int a = 0; a < 2; ++a) {
    const DenseCovSurface std_s = standardize_surface(
        dense_covariance(pl.moments[static_cast<std::size_t>(a)]), pl.pooled,
        pl.moments[static_cast<std::size_t>(a)].n);
    const double pair = surface_pair_trace(std_s, std_s, set.grid());
    const double n = set.sizes()[static_cast<std::size_t>(a)];
    manual += pl.hyp.weight(a, a) * pl.hyp.weight(a, a) * (n + 1.0) /
              (n * (n - 3.0)) * pair;
  }
  REQUIRE(testutil::rel_err(c, manual) < 1e-8);
  REQUIRE(c >= 1.0);
}

TEST_CASE("p-values sit on the matched law") {
  const ChiSquareApprox a = chisq_params(6.0, 3.0, 4.0);
  const ChiSquare chi(a.df);
  // exactly at the median the p-value is one half
  const double at_median = a.shift + a.scale * chi.quantile(0.5);
  REQUIRE(approx_p_value(at_median, a) == Approx(0.5).epsilon(1e-10));
  // left of the shift the law has no mass
  REQUIRE(approx_p_value(a.shift - 1.0, a) == 1.0);
  // upper quantile duality
  const double crit = a.shift + a.scale * chi.upper_quantile(0.05);
  REQUIRE(approx_p_value(crit, a) == Approx(0.05).epsilon(1e-10));
}

TEST_CASE("run_test produces a coherent report") {
  Rng rng(57);
  const SampleSet set = testutil::random_sampleset(rng, 3, 2, 10, 8, 12);
  TestOptions opt;
  opt.alphas = {0.01, 0.05, 0.2, 0.5, 0.9};
  const TestReport rep = run_test(set, equal_means_contrast(3), opt);
  REQUIRE(rep.statistic >= 0.0);
  REQUIRE(rep.adjustment >= 1.0);
  REQUIRE(rep.p_value >= 0.0);
  REQUIRE(rep.p_value <= 1.0);
  REQUIRE(rep.approx.k1 == Approx(2.0 * set.grid().volume()));
  for (const auto& [alpha, reject] : rep.reject_at) {
    REQUIRE(reject == (rep.p_value < alpha));
    // decision rule duality: reject iff T/c exceeds the critical value
    const double crit = rep.approx.shift +
                        rep.approx.scale * ChiSquare(rep.approx.df).upper_quantile(alpha);
    REQUIRE(reject == (rep.statistic / rep.adjustment > crit));
  }
  const TestReport plain =
      run_test(set, equal_means_contrast(3), {false, {0.05}});
  REQUIRE(plain.adjustment == 1.0);
  REQUIRE(plain.statistic == Approx(rep.statistic));
  REQUIRE(plain.p_value <= rep.p_value);  // adjustment only shrinks T/c
}

TEST_CASE("identical groups give p-value one for nonnegative shift") {
  Rng rng(58);
  const SampleSet base = testutil::random_sampleset(rng, 2, 2, 6, 8, 8);
  Eigen::MatrixXd flipped = base.group(0).curves().colwise().reverse();
  std::vector<GroupSample> groups = {base.group(0), GroupSample("b", 2, 6, flipped)};
  const SampleSet set(base.grid(), std::move(groups));
  Eigen::MatrixXd g(1, 2);
  g << 1, -1;
  const TestReport rep = run_test(set, g);
  REQUIRE(rep.statistic < 1e-15);
  if (rep.approx.shift >= 0.0) {
    REQUIRE(rep.p_value == 1.0);
  } else {
    REQUIRE(rep.p_value < 1.0);
  }
}

TEST_CASE("full test invariance under contrast mixing and pointwise maps") {
  Rng rng(59);
  for (int trial = 0; trial < 5; ++trial) {
    const int p = 2;
    const SampleSet set = testutil::random_sampleset(rng, 3, p, 7, 6, 10);
    const Eigen::MatrixXd g = testutil::random_contrast(rng, 3);
    const TestReport base = run_test(set, g);

    const Eigen::MatrixXd pm =
        testutil::random_nonsingular(rng, static_cast<int>(g.rows()));
    const TestReport mixed = run_test(set, pm * g);
    REQUIRE(testutil::rel_err(base.statistic, mixed.statistic) < 1e-8);
    REQUIRE(testutil::rel_err(base.adjustment, mixed.adjustment) < 1e-8);
    REQUIRE(testutil::rel_err(base.approx.df, mixed.approx.df) < 1e-7);
    REQUIRE(std::fabs(base.p_value - mixed.p_value) < 1e-8);

    std::vector<Eigen::MatrixXd> maps;
    for (int m = 0; m < 7; ++m) maps.push_back(testutil::random_nonsingular(rng, p));
    std::vector<GroupSample> mapped;
    for (const auto& gs : set.groups()) {
      Eigen::MatrixXd curves = gs.curves();
      for (int m = 0; m < 7; ++m) {
        curves.middleCols(m * p, p) =
            (maps[static_cast<std::size_t>(m)] *
             gs.curves().middleCols(m * p, p).transpose())
                .transpose();
      }
      mapped.emplace_back(gs.id(), p, 7, std::move(curves));
    }
    const TestReport trans = run_test(SampleSet(set.grid(), std::move(mapped)), g);
    REQUIRE(testutil::rel_err(base.statistic, trans.statistic) < 1e-8);
    REQUIRE(testutil::rel_err(base.adjustment, trans.adjustment) < 1e-8);
    REQUIRE(std::fabs(base.p_value - trans.p_value) < 1e-8);
  }
}
