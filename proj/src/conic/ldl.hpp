#pragma once

#include <vector>

#include <Eigen/Dense>

namespace rfs::conic::detail {

/// Sparse LDL' for quasidefinite matrices with a fill-reducing symmetric
/// ordering, a fixed pattern and dynamic regularization of pivots whose sign
/// disagrees with the expected one.
class QuasiDefiniteLdl {
 public:
  /// Lower-triangle entries (row >= col) of an n x n symmetric pattern.
  /// `sign[k]` is the expected pivot sign of row k (+1 or -1).
  void analyze(int n, const std::vector<int>& rows, const std::vector<int>& cols, std::vector<int> sign);
  /// Values in the order of the entries given to analyze().
  bool factorize(const std::vector<double>& values, double eps, double delta);
  /// In place: x <- K^-1 x.
  void solve(Eigen::VectorXd& x) const;
  int regularized_pivots() const { return regularized_; }
  std::size_t factor_nonzeros() const { return Li_.size(); }

 private:
  int n_ = 0;
  std::vector<int> perm_;     // perm_[k] = original index at position k
  std::vector<int> inverse_;  // inverse_[i] = position of original index i
  std::vector<int> sign_;     // by position
  // Upper triangle of the permuted matrix, compressed by column.
  std::vector<int> Ap_, Ai_;
  std::vector<int> slot_;  // entry -> position in Ax
  std::vector<double> Ax_;
  // Factor.
  std::vector<int> Lp_, Li_, parent_, lnz_;
  std::vector<double> Lx_, D_;
  mutable std::vector<double> work_;
  int regularized_ = 0;
};

}  // namespace rfs::conic::detail
