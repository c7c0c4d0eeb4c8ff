#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rfs/conic.hpp"
#include "rfs/types.hpp"

namespace rfs::dro {

/// min(p_01, p_11): the largest fairness weight for which the robust fair
/// program stays convex.
double eta_max(const MarginalTable& m);

/// Feature weights with a smaller Euclidean norm are treated as the
/// feature-free model.
inline constexpr double kZeroFeatureNorm = 1e-6;

struct DroDiagnostics {
  conic::Status status = conic::Status::MaxIter;
  double objective = 0.0;
  /// Radius multiplier psi (DRLR) or psi_0, psi_1 (DRFLR); NaN when the
  /// variable was eliminated (rho = 0).
  double psi = 0.0;
  std::array<double, 2> psi_s{0.0, 0.0};
  /// mu[s'][s][y], flattened as 4 s' + 2 s + y; NaN for dropped cells.
  std::array<double, 8> mu{};
  double t = 0.0;
  double seconds = 0.0;
  int iterations = 0;
  /// The feature weights were below kZeroFeatureNorm and returned as zeros.
  bool zero_features = false;
  conic::Certificate certificate;

  nlohmann::json to_json() const;
};

struct DroFit {
  WeightVector weights;
  DroDiagnostics diagnostics;
};

/// Handles into a built program.
struct DroProgram {
  conic::Program program;
  std::vector<conic::Var> w;
  std::optional<conic::Var> psi;
  std::array<std::optional<conic::Var>, 2> psi_s;
  std::optional<conic::Var> t;
  std::array<std::optional<conic::Var>, 8> mu;
};

/// min rho psi + (1/n) sum d_i  s.t.  loss(x_i, y_i) <= d_i,
/// loss(x_i, 1 - y_i) - psi kappa_y <= d_i,  ||w_feat||_2 <= psi.
/// The last column of X is the intercept and is left out of the norm.
/// kappa_y = +inf drops the label-flip rows; rho = 0 eliminates psi exactly.
DroProgram build_drlr(const Eigen::MatrixXd& X, const Labels& y, double rho, double kappa_y);

/// Robust fair program over the marginal-preserving Wasserstein ball, with
/// the fairness weight eta <= eta_max(marginals). Throws ValidationError
/// when eta is out of range.
DroProgram build_drflr(const Eigen::MatrixXd& X, const Labels& y, const GroupVector& s, const HyperParams& hp);

DroFit fit_drlr(const Eigen::MatrixXd& X, const Labels& y, const HyperParams& hp,
                const conic::SolveOptions& opts = {});
DroFit fit_drflr(const Eigen::MatrixXd& X, const Labels& y, const GroupVector& s, const HyperParams& hp,
                 const conic::SolveOptions& opts = {});
/// The rho = 0 case of fit_drflr.
DroFit fit_flr(const Eigen::MatrixXd& X, const Labels& y, const GroupVector& s, double eta,
               const conic::SolveOptions& opts = {});

/// Solves a built program, requires an Optimal certified status and
/// extracts w and the dual diagnostics. Throws SolverError otherwise.
DroFit solve_program(const DroProgram& prog, ModelFamily family, const conic::SolveOptions& opts);

}  // namespace rfs::dro
