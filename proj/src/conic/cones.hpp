#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rfs/conic.hpp"

namespace rfs::conic::detail {

/// Order of cone rows inside the solver's stacked slack vector: all
/// nonnegative rows, then second-order cones, then exponential cones.
struct ConeLayout {
  int n_lp = 0;
  std::vector<int> soc_dims;
  std::vector<int> soc_offsets;
  int n_exp = 0;
  int exp_offset = 0;
  int dim = 0;
  /// Barrier parameter.
  double nu = 0.0;

  void finalize();
};

bool primal_interior(const ConeLayout& L, const Eigen::VectorXd& s);
bool dual_interior(const ConeLayout& L, const Eigen::VectorXd& z);
/// Barrier gradient at s.
Eigen::VectorXd gradient(const ConeLayout& L, const Eigen::VectorXd& s);
/// max over cones of ||z + mu g(s)||_{H(s)^-1} / mu, ignoring the tau/kappa pair.
double proximity(const ConeLayout& L, const Eigen::VectorXd& s, const Eigen::VectorXd& z, double mu);
/// Self-dual starting pair with z = -g(s), so that s'z = nu.
void central_start(const ConeLayout& L, Eigen::VectorXd& s, Eigen::VectorXd& z);

/// Dense inverse Hessian of each non-LP cone block, and the diagonal of the
/// LP part, at s (divide by mu to get the Newton scaling).
struct HessianInverse {
  Eigen::VectorXd lp;
  std::vector<Eigen::MatrixXd> soc;
  std::vector<Eigen::Matrix3d> exp;
};
HessianInverse hessian_inverse(const ConeLayout& L, const Eigen::VectorXd& s);

/// Barrier Hessian of each SOC and exponential block at s.
struct BarrierHessian {
  std::vector<Eigen::MatrixXd> soc;
  std::vector<Eigen::Matrix3d> exp;
};
BarrierHessian barrier_hessian(const ConeLayout& L, const Eigen::VectorXd& s);

/// Third directional derivative F'''(s)[v, v] of the barrier.
Eigen::VectorXd third_order(const ConeLayout& L, const Eigen::VectorXd& s, const Eigen::VectorXd& v);

}  // namespace rfs::conic::detail
