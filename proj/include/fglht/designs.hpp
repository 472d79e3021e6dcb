#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fglht/error.hpp"
#include "fglht/grid.hpp"
#include "fglht/reconstruct.hpp"
#include "fglht/rng.hpp"
#include "fglht/sample.hpp"
#include "fglht/surface.hpp"

namespace fglht {

enum class NoiseDist { gaussian, student_t4, chisq4 };

inline NoiseDist noise_dist_from_string(const std::string& s) {
  if (s == "gaussian" || s == "normal") return NoiseDist::gaussian;
  if (s == "t4" || s == "t4_scaled" || s == "student") return NoiseDist::student_t4;
  if (s == "chisq4" || s == "chisq4_scaled" || s == "chisq") return NoiseDist::chisq4;
  throw DimensionError("unknown error distribution '" + s + "'");
}

inline std::string to_string(NoiseDist d) {
  switch (d) {
    case NoiseDist::gaussian: return "gaussian";
    case NoiseDist::student_t4: return "t4";
    default: return "chisq4";
  }
}

/// Mean-zero, unit-variance draw: N(0,1), t4/sqrt(2) or (chisq4-4)/(2 sqrt 2).
inline double unit_noise(NoiseDist d, Rng& rng) {
  switch (d) {
    case NoiseDist::gaussian:
      return rng.normal();
    case NoiseDist::student_t4:
      return rng.student_t(4) / std::sqrt(2.0);
    default:
      return (rng.chi_square(4) - 4.0) / (2.0 * std::sqrt(2.0));
  }
}

/// Three-group design on [0,1]: smooth baseline mean curves, group shifts
/// delta*g and 2*delta*g along a fixed direction, and a rank-q covariance
/// built on the Fourier basis with geometrically decaying weights
/// level_a * rho^r shared across components through c_l = l / sqrt(sum l^2).
struct FourierDesign {
  std::array<int, 3> sizes{100, 140, 140};
  int points = 50;       // grid resolution M
  int components = 6;    // p
  int basis_size = 7;    // q, odd (constant + sine/cosine pairs)
  double rho = 0.5;      // in (0,1); larger = flatter spectrum = noisier data
  std::array<double, 3> level{1.0, 2.0, 5.0};
  double shift = 0.0;    // delta >= 0; 0 makes all group means identical
  NoiseDist dist = NoiseDist::gaussian;

  void validate() const {
    if (!(rho > 0.0 && rho < 1.0)) throw DimensionError("FourierDesign: rho outside (0,1)");
    if (shift < 0.0) throw DimensionError("FourierDesign: shift must be >= 0");
    if (basis_size < 1 || basis_size % 2 == 0) {
      throw DimensionError("FourierDesign: basis size must be odd");
    }
    if (points < 2 || components < 1) throw DimensionError("FourierDesign: bad p or M");
    for (int n : sizes) {
      if (n < 2) throw DimensionError("FourierDesign: group sizes must be >= 2");
    }
  }

  Grid grid() const { return Grid(0.0, 1.0, points); }
};

namespace detail {

inline double fourier_basis(int r, double t) {  // r is 1-based
  if (r == 1) return 1.0;
  const int pair = (r % 2 == 0) ? r / 2 : (r - 1) / 2;
  const double arg = 2.0 * M_PI * pair * t;
  return (r % 2 == 0) ? std::sqrt(2.0) * std::sin(arg)
                      : std::sqrt(2.0) * std::cos(arg);
}

inline double baseline_mean(int h, double t) {  // h is 0-based component
  switch (h) {
    case 0: return std::pow(std::sin(2.0 * M_PI * t * t), 5.0);
    case 1: return std::pow(std::cos(2.0 * M_PI * t * t), 5.0);
    case 2: return std::cbrt(t) * (1.0 - t) - 5.0;
    case 3: return std::sqrt(5.0) * std::pow(t, 2.0 / 3.0) * std::exp(-7.0 * t);
    case 4: return std::sqrt(13.0 * t) * std::exp(-13.0 * t / 2.0);
    case 5: return 1.0 + 2.3 * t + 3.4 * t * t + 1.5 * t * t * t;
    default:
      // components beyond the six named curves repeat the polynomial
      return 1.0 + 2.3 * t + 3.4 * t * t + 1.5 * t * t * t;
  }
}

}  // namespace detail

/// Component loadings c_l = l / sqrt(1^2 + ... + p^2); their squares sum to 1.
inline Eigen::VectorXd component_loadings(int p) {
  double ss = 0.0;
  for (int l = 1; l <= p; ++l) ss += static_cast<double>(l) * l;
  Eigen::VectorXd c(p);
  for (int l = 1; l <= p; ++l) c(l - 1) = static_cast<double>(l) / std::sqrt(ss);
  return c;
}

/// Mean curve (p x M) of one group. The shift direction has l-th entry
/// g_l(t) / (sqrt(p+2) * |g_l|) with profile g_l(t) = (M-1) t^l + 1 and
/// |g_l| the Euclidean norm of the profile sampled on the grid, so the
/// stacked p*M-point shift vector has squared length shift^2 * p/(p+2).
inline Eigen::MatrixXd design_mean(const FourierDesign& d, int group) {
  d.validate();
  if (group < 0 || group > 2) throw DimensionError("design_mean: group out of range");
  const Grid grid = d.grid();
  const int p = d.components;
  Eigen::MatrixXd mean(p, d.points);
  for (int h = 0; h < p; ++h) {
    for (int m = 0; m < d.points; ++m) {
      mean(h, m) = detail::baseline_mean(h, grid.point(m));
    }
  }
  if (group == 0 || d.shift == 0.0) return mean;

  const double mult = d.shift * static_cast<double>(group);  // delta, 2*delta
  for (int h = 0; h < p; ++h) {
    double norm_sq = 0.0;
    std::vector<double> g(static_cast<std::size_t>(d.points));
    for (int m = 0; m < d.points; ++m) {
      const double t = grid.point(m);
      g[static_cast<std::size_t>(m)] =
          static_cast<double>(d.points - 1) * std::pow(t, h + 1) + 1.0;
      norm_sq += g[static_cast<std::size_t>(m)] * g[static_cast<std::size_t>(m)];
    }
    const double denom = std::sqrt((static_cast<double>(p) + 2.0) * norm_sq);
    for (int m = 0; m < d.points; ++m) {
      mean(h, m) += mult * g[static_cast<std::size_t>(m)] / denom;
    }
  }
  return mean;
}

/// Draws a full sample set from the design. Deterministic given the seed;
/// each group runs on its own derived stream.
inline SampleSet generate(const FourierDesign& d, std::uint64_t seed) {
  d.validate();
  const Grid grid = d.grid();
  const int p = d.components;
  const int q = d.basis_size;
  const Eigen::VectorXd c = component_loadings(p);

  Eigen::MatrixXd basis(q, d.points);
  for (int r = 1; r <= q; ++r) {
    for (int m = 0; m < d.points; ++m) {
      basis(r - 1, m) = detail::fourier_basis(r, grid.point(m));
    }
  }

  std::vector<GroupSample> groups;
  for (int a = 0; a < 3; ++a) {
    const Eigen::MatrixXd mean = design_mean(d, a);
    Eigen::VectorXd root_weights(q);
    for (int r = 1; r <= q; ++r) {
      root_weights(r - 1) =
          std::sqrt(d.level[static_cast<std::size_t>(a)] * std::pow(d.rho, r));
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(a)));
    const int n = d.sizes[static_cast<std::size_t>(a)];
    Eigen::MatrixXd curves(n, static_cast<Eigen::Index>(p) * d.points);
    Eigen::MatrixXd coef(p, q);
    for (int i = 0; i < n; ++i) {
      // independent basis scores per component; the loading c_h sets the
      // component scale, so var[y_h(t)] = sum_r level*rho^r c_h^2 psi_r(t)^2
      for (int h = 0; h < p; ++h) {
        for (int r = 0; r < q; ++r) {
          coef(h, r) = root_weights(r) * unit_noise(d.dist, rng);
        }
      }
      const Eigen::MatrixXd score = coef * basis;  // p x M
      for (int m = 0; m < d.points; ++m) {
        for (int h = 0; h < p; ++h) {
          curves(i, m * p + h) = mean(h, m) + c(h) * score(h, m);
        }
      }
    }
    groups.emplace_back("g" + std::to_string(a + 1), p, d.points, std::move(curves));
  }
  return SampleSet(grid, std::move(groups));
}

/// Population covariance surface of one group of the design:
/// block (m, m') = diag(c_h^2) * sum_r level*rho^r psi_r(t_m) psi_r(t_m').
inline DenseCovSurface population_covariance(const FourierDesign& d, int group) {
  d.validate();
  if (group < 0 || group > 2) {
    throw DimensionError("population_covariance: group out of range");
  }
  const Grid grid = d.grid();
  const int p = d.components;
  const Eigen::VectorXd c = component_loadings(p);
  DenseCovSurface s;
  s.p = p;
  s.points = d.points;
  s.mat.setZero(static_cast<Eigen::Index>(p) * d.points,
                static_cast<Eigen::Index>(p) * d.points);
  for (int m = 0; m < d.points; ++m) {
    for (int m2 = m; m2 < d.points; ++m2) {
      double kernel = 0.0;
      for (int r = 1; r <= d.basis_size; ++r) {
        kernel += d.level[static_cast<std::size_t>(group)] * std::pow(d.rho, r) *
                  detail::fourier_basis(r, grid.point(m)) *
                  detail::fourier_basis(r, grid.point(m2));
      }
      for (int h = 0; h < p; ++h) {
        s.mat(m * p + h, m2 * p + h) = c(h) * c(h) * kernel;
        s.mat(m2 * p + h, m * p + h) = c(h) * c(h) * kernel;
      }
    }
  }
  return s;
}

/// Four-group bivariate design on [0,1]: each curve is a fixed 2x2 mix of
/// two independent Brownian paths (variance rate `dispersion` per unit
/// time, zero at the left endpoint); all group means are zero. The noise
/// variant adds i.i.d. measurement error and then reconstructs every curve
/// with the GCV smoothing spline; the sparse variant keeps a random subset
/// of grid points per curve and reconstructs back onto the full grid.
struct BrownianDesign {
  enum class Variant { plain, noise, sparse };

  std::array<int, 4> sizes{24, 48, 80, 112};
  int points = 50;
  double dispersion = 0.04;  // increment variance per unit time
  Variant variant = Variant::plain;
  double noise_sd = 0.1;       // used by Variant::noise
  double keep_fraction = 0.5;  // used by Variant::sparse

  void validate() const {
    if (points < 2) throw DimensionError("BrownianDesign: need M >= 2");
    if (dispersion <= 0.0) throw DimensionError("BrownianDesign: dispersion must be > 0");
    if (variant == Variant::noise && noise_sd < 0.0) {
      throw DimensionError("BrownianDesign: noise sd must be >= 0");
    }
    if (variant == Variant::sparse) {
      const int keep = static_cast<int>(
          std::ceil(keep_fraction * static_cast<double>(points)));
      if (keep < 2) {
        throw DimensionError("BrownianDesign: keep fraction leaves fewer than 2 points");
      }
    }
    for (int n : sizes) {
      if (n < 2) throw DimensionError("BrownianDesign: group sizes must be >= 2");
    }
  }

  Grid grid() const { return Grid(0.0, 1.0, points); }
};

/// The fixed 2x2 mixing matrix of group a (0-based): c I + d 11^T with
/// (c, d) = (0.7, 0.3), (0.5, 0.5), (0.3, 0.7), (0.1, 0.9).
inline Eigen::Matrix2d brownian_mix(int group) {
  static const std::array<std::pair<double, double>, 4> cd = {
      {{0.7, 0.3}, {0.5, 0.5}, {0.3, 0.7}, {0.1, 0.9}}};
  const auto [ci, di] = cd[static_cast<std::size_t>(group)];
  Eigen::Matrix2d a = Eigen::Matrix2d::Identity() * ci;
  a.array() += di;
  return a;
}

/// One Brownian path on the grid: zero at the first point, independent
/// N(0, rate * dt) increments.
inline void brownian_path(Rng& rng, const Grid& grid, double rate, double* out) {
  const double dt = grid.volume() / static_cast<double>(grid.size() - 1);
  const double sd = std::sqrt(rate * dt);
  out[0] = 0.0;
  for (int m = 1; m < grid.size(); ++m) {
    out[m] = out[m - 1] + sd * rng.normal();
  }
}

inline SampleSet generate(const BrownianDesign& d, std::uint64_t seed) {
  d.validate();
  const Grid grid = d.grid();
  const int p = 2;
  const int keep = static_cast<int>(
      std::ceil(d.keep_fraction * static_cast<double>(d.points)));

  std::vector<GroupSample> groups;
  std::vector<Observation> sparse_obs;  // only used by the sparse variant
  std::vector<double> b1(static_cast<std::size_t>(d.points));
  std::vector<double> b2(static_cast<std::size_t>(d.points));
  std::vector<int> pool(static_cast<std::size_t>(d.points));

  for (int a = 0; a < 4; ++a) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(a)));
    const Eigen::Matrix2d mix = brownian_mix(a);
    const int n = d.sizes[static_cast<std::size_t>(a)];
    Eigen::MatrixXd curves(n, static_cast<Eigen::Index>(p) * d.points);
    for (int i = 0; i < n; ++i) {
      brownian_path(rng, grid, d.dispersion, b1.data());
      brownian_path(rng, grid, d.dispersion, b2.data());
      for (int m = 0; m < d.points; ++m) {
        const Eigen::Vector2d v =
            mix * Eigen::Vector2d(b1[static_cast<std::size_t>(m)],
                                  b2[static_cast<std::size_t>(m)]);
        curves(i, m * p + 0) = v(0);
        curves(i, m * p + 1) = v(1);
      }
      if (d.variant == BrownianDesign::Variant::noise) {
        for (int m = 0; m < d.points; ++m) {
          curves(i, m * p + 0) += d.noise_sd * rng.normal();
          curves(i, m * p + 1) += d.noise_sd * rng.normal();
        }
        // reconstruct through the smoothing spline, component by component
        std::vector<double> y(static_cast<std::size_t>(d.points));
        const std::vector<double> tpts = grid.points();
        for (int h = 0; h < p; ++h) {
          for (int m = 0; m < d.points; ++m) {
            y[static_cast<std::size_t>(m)] = curves(i, m * p + h);
          }
          const SmoothingFit fit = fit_smoothing_spline(tpts, y);
          for (int m = 0; m < d.points; ++m) {
            curves(i, m * p + h) = fit.spline.y[static_cast<std::size_t>(m)];
          }
        }
      } else if (d.variant == BrownianDesign::Variant::sparse) {
        // Keep the endpoints, then a uniform subset of the interior.
        for (int m = 0; m < d.points; ++m) pool[static_cast<std::size_t>(m)] = m;
        std::vector<int> kept = {0, d.points - 1};
        // partial Fisher-Yates over the interior indices 1..M-2
        std::vector<int> interior(pool.begin() + 1, pool.end() - 1);
        for (int j = 0; j < keep - 2; ++j) {
          const int pick = j + rng.uniform_int(static_cast<int>(interior.size()) - j);
          std::swap(interior[static_cast<std::size_t>(j)],
                    interior[static_cast<std::size_t>(pick)]);
          kept.push_back(interior[static_cast<std::size_t>(j)]);
        }
        std::sort(kept.begin(), kept.end());
        for (int m : kept) {
          for (int h = 0; h < p; ++h) {
            Observation o;
            o.group = "g" + std::to_string(a + 1);
            o.subject = std::to_string(i + 1);
            o.component = h + 1;
            o.time = grid.point(m);
            o.value = curves(i, m * p + h);
            sparse_obs.push_back(std::move(o));
          }
        }
      }
    }
    if (d.variant != BrownianDesign::Variant::sparse) {
      groups.emplace_back("g" + std::to_string(a + 1), p, d.points, std::move(curves));
    }
  }

  if (d.variant == BrownianDesign::Variant::sparse) {
    return reconstruct(sparse_obs, grid, ReconstructMethod::smoothing_spline);
  }
  return SampleSet(grid, std::move(groups));
}

}  // namespace fglht
