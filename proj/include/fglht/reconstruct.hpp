#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fglht/error.hpp"
#include "fglht/sample.hpp"
#include "fglht/smoothing_spline.hpp"

namespace fglht {

enum class ReconstructMethod { linear, smoothing_spline };

/// Side information from a reconstruction pass.
struct ReconstructInfo {
  int extrapolated_values = 0;  // grid evaluations outside a subject's range
  int linear_fallbacks = 0;     // series with < 4 points under the spline method
};

namespace detail {

struct Series {
  std::vector<double> t;
  std::vector<double> v;
};

// Sort by time and average duplicated time points.
inline void normalize_series(Series& s) {
  std::vector<std::size_t> idx(s.t.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return s.t[a] < s.t[b]; });
  std::vector<double> t2, v2;
  t2.reserve(s.t.size());
  v2.reserve(s.t.size());
  for (std::size_t i = 0; i < idx.size();) {
    const double t = s.t[idx[i]];
    double sum = 0.0;
    int c = 0;
    while (i < idx.size() && s.t[idx[i]] == t) {
      sum += s.v[idx[i]];
      ++c;
      ++i;
    }
    t2.push_back(t);
    v2.push_back(sum / c);
  }
  s.t = std::move(t2);
  s.v = std::move(v2);
}

}  // namespace detail

/// Puts every (group, subject, component) series onto the common grid.
/// Series with at least 4 distinct time points use the GCV smoothing spline
/// when requested; shorter series fall back to linear interpolation (which
/// needs at least 2 distinct points). Evaluations outside a subject's
/// observed range continue the boundary value and are counted in `info`.
/// Groups and subjects keep their order of first appearance.
inline SampleSet reconstruct(const std::vector<Observation>& observations,
                             const Grid& grid, ReconstructMethod method,
                             ReconstructInfo* info = nullptr) {
  if (observations.empty()) {
    throw DimensionError("reconstruct: no observations");
  }
  int p = 0;
  for (const auto& o : observations) {
    if (o.component < 1) {
      throw DimensionError("reconstruct: component index " +
                           std::to_string(o.component) + " out of range");
    }
    p = std::max(p, o.component);
  }

  // group -> subject -> component series, insertion-ordered
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<std::string>> subject_order;
  std::map<std::pair<std::string, std::string>, std::vector<detail::Series>> series;
  for (const auto& o : observations) {
    if (subject_order.find(o.group) == subject_order.end()) {
      group_order.push_back(o.group);
      subject_order[o.group] = {};
    }
    const auto key = std::make_pair(o.group, o.subject);
    if (series.find(key) == series.end()) {
      subject_order[o.group].push_back(o.subject);
      series[key].resize(static_cast<std::size_t>(p));
    }
    auto& s = series[key][static_cast<std::size_t>(o.component - 1)];
    s.t.push_back(o.time);
    s.v.push_back(o.value);
  }

  ReconstructInfo local;
  std::vector<GroupSample> groups;
  for (const auto& gname : group_order) {
    const auto& subjects = subject_order[gname];
    Eigen::MatrixXd curves(static_cast<Eigen::Index>(subjects.size()),
                           static_cast<Eigen::Index>(p) * grid.size());
    for (std::size_t si = 0; si < subjects.size(); ++si) {
      auto& comp_series = series[{gname, subjects[si]}];
      for (int h = 0; h < p; ++h) {
        auto& s = comp_series[static_cast<std::size_t>(h)];
        detail::normalize_series(s);
        const std::string who =
            "group '" + gname + "' subject '" + subjects[si] + "' component " +
            std::to_string(h + 1);
        if (s.t.size() < 2) {
          throw SizeError("reconstruct: " + who + " has fewer than 2 distinct time points");
        }
        const bool spline =
            method == ReconstructMethod::smoothing_spline && s.t.size() >= 4;
        if (method == ReconstructMethod::smoothing_spline && !spline) {
          ++local.linear_fallbacks;
        }
        CubicSpline fitted;
        if (spline) fitted = fit_smoothing_spline(s.t, s.v).spline;
        for (int m = 0; m < grid.size(); ++m) {
          const double t = grid.point(m);
          if (t < s.t.front() || t > s.t.back()) ++local.extrapolated_values;
          curves(static_cast<Eigen::Index>(si), m * p + h) =
              spline ? fitted(t) : linear_interp(s.t, s.v, t);
        }
      }
    }
    groups.emplace_back(gname, p, grid.size(), std::move(curves),
                        std::vector<std::string>(subjects.begin(), subjects.end()));
  }
  if (info) *info = local;
  return SampleSet(grid, std::move(groups));
}

}  // namespace fglht
