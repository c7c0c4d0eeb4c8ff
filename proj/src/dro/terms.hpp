#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rfs/conic.hpp"
#include "rfs/types.hpp"

namespace rfs::dro::detail {

/// Throws DataError unless X, y are finite, aligned, binary and two-class.
void check_design(const Eigen::MatrixXd& X, const Labels& y);
/// x_i' w for every row.
std::vector<conic::Affine> scores(const Eigen::MatrixXd& X, const std::vector<conic::Var>& w);
/// Every weight except the trailing intercept.
std::vector<conic::Affine> feature_weights(const std::vector<conic::Var>& w);

}  // namespace rfs::dro::detail
