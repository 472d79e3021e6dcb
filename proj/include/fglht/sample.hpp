#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fglht/error.hpp"
#include "fglht/grid.hpp"

namespace fglht {

/// One record of a long-format data file.
struct Observation {
  std::string group;
  std::string subject;
  int component = 0;  // 1-based
  double time = 0.0;
  double value = 0.0;
};

/// One group of n discretized vector-valued curves on a shared grid.
///
/// Storage is an n x (p*M) matrix, one row per curve, grid-major: column
/// m*p + h holds component h (0-based) at grid point m. The p columns of a
/// grid point are therefore contiguous, which is what every per-point
/// matrix operation downstream wants.
class GroupSample {
 public:
  GroupSample(std::string id, int components, int points, Eigen::MatrixXd curves,
              std::vector<std::string> subjects = {})
      : id_(std::move(id)),
        p_(components),
        m_(points),
        curves_(std::move(curves)),
        subjects_(std::move(subjects)) {
    if (p_ < 1 || m_ < 2) throw DimensionError("GroupSample: bad p or M");
    if (curves_.rows() < 1 || curves_.cols() != static_cast<Eigen::Index>(p_) * m_) {
      throw DimensionError("GroupSample: curve matrix shape mismatch");
    }
    if (!curves_.allFinite()) {
      throw DimensionError("GroupSample '" + id_ + "': non-finite curve values");
    }
    if (subjects_.empty()) {
      subjects_.reserve(static_cast<std::size_t>(curves_.rows()));
      for (Eigen::Index i = 0; i < curves_.rows(); ++i) {
        subjects_.push_back(std::to_string(i + 1));
      }
    }
    if (static_cast<Eigen::Index>(subjects_.size()) != curves_.rows()) {
      throw DimensionError("GroupSample: subject label count mismatch");
    }
  }

  const std::string& id() const { return id_; }
  int size() const { return static_cast<int>(curves_.rows()); }  // n
  int components() const { return p_; }                          // p
  int points() const { return m_; }                              // M
  const std::vector<std::string>& subjects() const { return subjects_; }

  const Eigen::MatrixXd& curves() const { return curves_; }

  /// Value of curve i, component h (0-based), grid point m.
  double value(int i, int h, int m) const { return curves_(i, m * p_ + h); }

  /// n x p block of all curves at grid point m.
  auto at_point(int m) const { return curves_.middleCols(m * p_, p_); }

 private:
  std::string id_;
  int p_;
  int m_;
  Eigen::MatrixXd curves_;
  std::vector<std::string> subjects_;
};

/// k independent groups plus the grid they share; the input to every test.
class SampleSet {
 public:
  SampleSet(Grid grid, std::vector<GroupSample> groups)
      : grid_(grid), groups_(std::move(groups)) {
    if (groups_.size() < 2) throw DimensionError("SampleSet: need k >= 2 groups");
    const int p = groups_.front().components();
    for (const auto& g : groups_) {
      if (g.components() != p) {
        throw DimensionError("SampleSet: groups disagree on component count");
      }
      if (g.points() != grid_.size()) {
        throw DimensionError("SampleSet: group resolution does not match grid");
      }
    }
  }

  const Grid& grid() const { return grid_; }
  const std::vector<GroupSample>& groups() const { return groups_; }
  const GroupSample& group(int a) const {
    return groups_[static_cast<std::size_t>(a)];
  }

  int group_count() const { return static_cast<int>(groups_.size()); }  // k
  int components() const { return groups_.front().components(); }       // p

  std::vector<int> sizes() const {
    std::vector<int> n;
    n.reserve(groups_.size());
    for (const auto& g : groups_) n.push_back(g.size());
    return n;
  }

  int total_size() const {
    int n = 0;
    for (const auto& g : groups_) n += g.size();
    return n;
  }

 private:
  Grid grid_;
  std::vector<GroupSample> groups_;
};

/// Shape accessors: (k, p, n_1..n_k) and the grid.
inline std::pair<std::pair<int, int>, std::vector<int>> dims_of(const SampleSet& s) {
  return {{s.group_count(), s.components()}, s.sizes()};
}

inline const Grid& resolution_of(const SampleSet& s) { return s.grid(); }

}  // namespace fglht
