#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fglht/error.hpp"

namespace fglht {

/// Linear hypothesis on the k group mean curves: contrast * M(t) = 0 for a
/// full-row-rank q x k coefficient matrix. Carries the derived pieces every
/// estimator needs: (C D C^T)^{-1} with D = diag(1/n_1..1/n_k), and the
/// k x k weight matrix C^T (C D C^T)^{-1} C, which is invariant under
/// replacing the contrast by P*contrast for nonsingular P.
class Hypothesis {
 public:
  Hypothesis(Eigen::MatrixXd contrast, std::vector<int> sizes)
      : contrast_(std::move(contrast)), sizes_(std::move(sizes)) {
    const int q = static_cast<int>(contrast_.rows());
    const int k = static_cast<int>(contrast_.cols());
    if (k != static_cast<int>(sizes_.size())) {
      throw DimensionError("Hypothesis: contrast columns must match group count");
    }
    if (q < 1 || q >= k) {
      throw HypothesisError("Hypothesis: need 1 <= q < k rows");
    }
    for (int n : sizes_) {
      if (n < 2) throw SizeError("Hypothesis: every group needs n >= 2");
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(contrast_);
    const auto& sv = svd.singularValues();
    const double tol = 1e-10 * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > tol) ++rank;
    }
    if (rank != q) {
      throw HypothesisError("Hypothesis: contrast matrix is rank deficient (rank " +
                            std::to_string(rank) + " of " + std::to_string(q) + ")");
    }

    Eigen::VectorXd d(k);
    for (int a = 0; a < k; ++a) d(a) = 1.0 / static_cast<double>(sizes_[a]);
    const Eigen::MatrixXd gram = contrast_ * d.asDiagonal() * contrast_.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (gram + gram.transpose()));
    if (llt.info() != Eigen::Success) {
      throw HypothesisError("Hypothesis: size-weighted Gram matrix is not positive definite");
    }
    gram_inv_ = llt.solve(Eigen::MatrixXd::Identity(q, q));
    gram_inv_ = 0.5 * (gram_inv_ + gram_inv_.transpose()).eval();
    weight_ = contrast_.transpose() * gram_inv_ * contrast_;
    weight_ = 0.5 * (weight_ + weight_.transpose()).eval();
  }

  int rank() const { return static_cast<int>(contrast_.rows()); }   // q
  int groups() const { return static_cast<int>(contrast_.cols()); } // k
  const std::vector<int>& sizes() const { return sizes_; }

  const Eigen::MatrixXd& contrast() const { return contrast_; }
  const Eigen::MatrixXd& gram_inverse() const { return gram_inv_; }
  const Eigen::MatrixXd& weight_matrix() const { return weight_; }
  double weight(int a, int b) const { return weight_(a, b); }

 private:
  Eigen::MatrixXd contrast_;
  std::vector<int> sizes_;
  Eigen::MatrixXd gram_inv_;
  Eigen::MatrixXd weight_;
};

inline Hypothesis make_hypothesis(const Eigen::MatrixXd& contrast,
                                  const std::vector<int>& sizes) {
  return Hypothesis(contrast, sizes);
}

/// The one-way layout contrast [I_{k-1}, -1_{k-1}]: all k means equal.
inline Eigen::MatrixXd equal_means_contrast(int k) {
  if (k < 2) throw HypothesisError("equal_means_contrast: need k >= 2");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k - 1, k);
  g.leftCols(k - 1).setIdentity();
  g.col(k - 1).setConstant(-1.0);
  return g;
}

}  // namespace fglht
