#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rfs/dataset.hpp"
#include "rfs/types.hpp"

namespace rfs::nominal {

struct OptimizerOptions {
  double grad_tol = 1e-8;
  int max_iter = 10000;

  void validate() const;
};

struct FitInfo {
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double grad_norm = 0.0;
};

/// sigma(X w), clamped to [1e-12, 1 - 1e-12].
ScoreVector predict_proba(const WeightVector& w, const Eigen::MatrixXd& X);
ScoreVector predict_proba(const Eigen::VectorXd& w, const Eigen::MatrixXd& X);

/// Numerically stable log(1 + e^z).
double softplus(double z);
double sigmoid(double z);

/// Mean cross-entropy of sigma(X w) against y, computed through softplus so
/// that it is exact far into the tails. Gradient is X^T (sigma(Xw) - y) / n.
double logloss(const Eigen::VectorXd& w, const Eigen::MatrixXd& X, const Labels& y,
               Eigen::VectorXd* grad = nullptr);

/// logloss + lambda * sum of squared non-intercept weights.
double l2_objective(const Eigen::VectorXd& w, const Eigen::MatrixXd& X, const Labels& y, double lambda,
                    Eigen::VectorXd* grad = nullptr);

/// Damped Newton from w = 0 with Armijo backtracking; stops at
/// ||grad||_inf <= grad_tol.
WeightVector fit_lr(const Eigen::MatrixXd& X, const Labels& y, const OptimizerOptions& opts = {},
                    FitInfo* info = nullptr);
WeightVector fit_lrl2(const Eigen::MatrixXd& X, const Labels& y, double lambda,
                      const OptimizerOptions& opts = {}, FitInfo* info = nullptr);

using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

/// ||g - g_fd||_inf / max(||g||_inf, ||g_fd||_inf) for the analytic gradient
/// g and central differences g_fd with step h.
double check_gradient(const Objective& f, const Eigen::VectorXd& w0, double h = 1e-5);

// ---------------------------------------------------------------------------
// Model files

struct FittedModel {
  WeightVector weights;
  std::vector<std::string> feature_names;
  HyperParams hyperparams;
  std::vector<data::FeatureScaling> scaling;
  std::uint64_t seed = 0;
  nlohmann::json diagnostics = nlohmann::json::object();
  /// Fitted preprocessing, when the model was trained from a raw table.
  nlohmann::json preprocessing;

  ScoreVector predict(const Eigen::MatrixXd& X) const { return predict_proba(weights, X); }
};

nlohmann::json hyperparams_to_json(const HyperParams& hp);
HyperParams hyperparams_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FittedModel& m);
FittedModel model_from_json(const nlohmann::json& j);
void save_model(const FittedModel& m, const std::filesystem::path& path);
FittedModel load_model(const std::filesystem::path& path);

}  // namespace rfs::nominal
