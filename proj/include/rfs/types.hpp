#pragma once

#include <array>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace rfs {

/// Binary labels, 1 = default.
using Labels = Eigen::VectorXi;
/// Binary sensitive attribute, 1 = protected group.
using GroupVector = Eigen::VectorXi;
/// Predicted probabilities of default.
using ScoreVector = Eigen::VectorXd;

enum class ModelFamily { LR, LRL2, FLR, DRLR, DRFLR };

std::string_view to_string(ModelFamily f);
/// Throws ConfigError for unknown names.
ModelFamily parse_family(std::string_view name);

inline constexpr std::array<ModelFamily, 5> kAllFamilies = {
    ModelFamily::LR, ModelFamily::LRL2, ModelFamily::FLR, ModelFamily::DRLR, ModelFamily::DRFLR};

/// Model coefficients; by convention the last entry multiplies the constant
/// intercept column.
struct WeightVector {
  Eigen::VectorXd w;
  ModelFamily family = ModelFamily::LR;
};

/// Empirical proportions of the four (s, y) cells.
struct MarginalTable {
  // Index 2*s + y: (0,0), (0,1), (1,0), (1,1).
  std::array<double, 4> p{0.0, 0.0, 0.0, 0.0};

  double at(int s, int y) const { return p[static_cast<std::size_t>(2 * s + y)]; }
  double& at(int s, int y) { return p[static_cast<std::size_t>(2 * s + y)]; }
};

}  // namespace rfs

namespace rfs {

/// Hyperparameters of every family; each family reads the fields it needs.
struct HyperParams {
  double rho = 0.0;
  double eta = 0.0;
  double kappa_s = 1.0;
  /// +infinity means labels cannot be transported.
  double kappa_y = 1.0;
  /// L2 weight of LRL2.
  double lambda = 0.0;
  /// Charge kappa_y / 2 per label flip instead of kappa_y.
  bool halve_kappa_y = false;

  double label_cost() const { return halve_kappa_y ? 0.5 * kappa_y : kappa_y; }
};

}  // namespace rfs
