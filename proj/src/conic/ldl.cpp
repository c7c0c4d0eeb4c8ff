#include "ldl.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

namespace rfs::conic::detail {

void QuasiDefiniteLdl::analyze(int n, const std::vector<int>& rows, const std::vector<int>& cols,
                               std::vector<int> sign) {
  n_ = n;
  const std::size_t nnz = rows.size();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nnz);
  for (std::size_t e = 0; e < nnz; ++e) trip.emplace_back(rows[e], cols[e], 1.0);
  Eigen::SparseMatrix<double> pattern(n, n);
  pattern.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> full = pattern.selfadjointView<Eigen::Lower>();
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
  Eigen::AMDOrdering<int> amd;
  amd(full, pinv);

  perm_.assign(pinv.indices().data(), pinv.indices().data() + n);
  if (perm_.empty() && n > 0) {
    perm_.resize(static_cast<std::size_t>(n));
    std::iota(perm_.begin(), perm_.end(), 0);
  }
  inverse_.assign(static_cast<std::size_t>(n), 0);
  for (int k = 0; k < n; ++k) inverse_[static_cast<std::size_t>(perm_[static_cast<std::size_t>(k)])] = k;
  sign_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) sign_[static_cast<std::size_t>(k)] = sign[static_cast<std::size_t>(perm_[static_cast<std::size_t>(k)])];

  // Permuted upper triangle, column compressed.
  std::vector<int> pr(nnz), pc(nnz);
  Ap_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t e = 0; e < nnz; ++e) {
    const int a = inverse_[static_cast<std::size_t>(rows[e])], b = inverse_[static_cast<std::size_t>(cols[e])];
    pr[e] = std::min(a, b);
    pc[e] = std::max(a, b);
    ++Ap_[static_cast<std::size_t>(pc[e]) + 1];
  }
  for (int k = 0; k < n; ++k) Ap_[static_cast<std::size_t>(k) + 1] += Ap_[static_cast<std::size_t>(k)];
  std::vector<int> next(Ap_.begin(), Ap_.end() - 1);
  Ai_.assign(nnz, 0);
  slot_.assign(nnz, 0);
  for (std::size_t e = 0; e < nnz; ++e) {
    const int p = next[static_cast<std::size_t>(pc[e])]++;
    Ai_[static_cast<std::size_t>(p)] = pr[e];
    slot_[e] = p;
  }
  Ax_.assign(nnz, 0.0);

  // Elimination tree and column counts.
  parent_.assign(static_cast<std::size_t>(n), -1);
  lnz_.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> flag(static_cast<std::size_t>(n), 0);
  for (int k = 0; k < n; ++k) {
    flag[static_cast<std::size_t>(k)] = k;
    for (int p = Ap_[static_cast<std::size_t>(k)]; p < Ap_[static_cast<std::size_t>(k) + 1]; ++p) {
      int i = Ai_[static_cast<std::size_t>(p)];
      for (; i < k && flag[static_cast<std::size_t>(i)] != k; i = parent_[static_cast<std::size_t>(i)]) {
        if (parent_[static_cast<std::size_t>(i)] == -1) parent_[static_cast<std::size_t>(i)] = k;
        ++lnz_[static_cast<std::size_t>(i)];
        flag[static_cast<std::size_t>(i)] = k;
      }
    }
  }
  Lp_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int k = 0; k < n; ++k) Lp_[static_cast<std::size_t>(k) + 1] = Lp_[static_cast<std::size_t>(k)] + lnz_[static_cast<std::size_t>(k)];
  Li_.assign(static_cast<std::size_t>(Lp_.back()), 0);
  Lx_.assign(static_cast<std::size_t>(Lp_.back()), 0.0);
  D_.assign(static_cast<std::size_t>(n), 0.0);
  work_.assign(static_cast<std::size_t>(n), 0.0);
}

bool QuasiDefiniteLdl::factorize(const std::vector<double>& values, double eps, double delta) {
  for (std::size_t e = 0; e < values.size(); ++e) Ax_[static_cast<std::size_t>(slot_[e])] = values[e];
  const auto n = static_cast<std::size_t>(n_);
  std::vector<double> Y(n, 0.0);
  std::vector<int> pattern(n), flag(n);
  std::fill(lnz_.begin(), lnz_.end(), 0);
  regularized_ = 0;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t top = n;
    flag[k] = static_cast<int>(k);
    for (int p = Ap_[k]; p < Ap_[k + 1]; ++p) {
      auto i = static_cast<std::size_t>(Ai_[static_cast<std::size_t>(p)]);
      Y[i] += Ax_[static_cast<std::size_t>(p)];
      std::size_t len = 0;
      for (; flag[i] != static_cast<int>(k); i = static_cast<std::size_t>(parent_[i])) {
        pattern[len++] = static_cast<int>(i);
        flag[i] = static_cast<int>(k);
      }
      while (len > 0) pattern[--top] = pattern[--len];
    }
    double d = Y[k];
    Y[k] = 0.0;
    for (; top < n; ++top) {
      const auto i = static_cast<std::size_t>(pattern[top]);
      const double yi = Y[i];
      Y[i] = 0.0;
      const auto p2 = static_cast<std::size_t>(Lp_[i] + lnz_[i]);
      for (auto p = static_cast<std::size_t>(Lp_[i]); p < p2; ++p) Y[static_cast<std::size_t>(Li_[p])] -= Lx_[p] * yi;
      const double l = yi / D_[i];
      d -= l * yi;
      Li_[p2] = static_cast<int>(k);
      Lx_[p2] = l;
      ++lnz_[i];
    }
    if (sign_[k] * d <= eps) {
      d = sign_[k] * delta;
      ++regularized_;
    }
    if (!std::isfinite(d)) return false;
    D_[k] = d;
  }
  return true;
}

void QuasiDefiniteLdl::solve(Eigen::VectorXd& x) const {
  const auto n = static_cast<std::size_t>(n_);
  auto& w = work_;
  for (std::size_t k = 0; k < n; ++k) w[k] = x[perm_[k]];
  for (std::size_t j = 0; j < n; ++j) {
    const double wj = w[j];
    for (auto p = static_cast<std::size_t>(Lp_[j]); p < static_cast<std::size_t>(Lp_[j + 1]); ++p) {
      w[static_cast<std::size_t>(Li_[p])] -= Lx_[p] * wj;
    }
  }
  for (std::size_t j = 0; j < n; ++j) w[j] /= D_[j];
  for (std::size_t j = n; j-- > 0;) {
    double wj = w[j];
    for (auto p = static_cast<std::size_t>(Lp_[j]); p < static_cast<std::size_t>(Lp_[j + 1]); ++p) {
      wj -= Lx_[p] * w[static_cast<std::size_t>(Li_[p])];
    }
    w[j] = wj;
  }
  for (std::size_t k = 0; k < n; ++k) x[perm_[k]] = w[k];
}

}  // namespace rfs::conic::detail
