#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "rfs/error.hpp"
#include "rfs/metrics.hpp"
#include "rfs/nominal.hpp"

namespace rfs::nominal {

namespace {

void check_dims(const Eigen::VectorXd& w, const Eigen::MatrixXd& X) {
  if (w.size() != X.cols()) {
    throw DataError("weight vector has " + std::to_string(w.size()) + " entries, design has " +
                    std::to_string(X.cols()) + " columns");
  }
}

void check_labels(const Eigen::MatrixXd& X, const Labels& y) {
  if (X.rows() != y.size()) throw DataError("design and labels differ in length");
  if (((y.array() != 0) && (y.array() != 1)).any()) throw DataError("labels must be 0/1");
}

WeightVector newton(const Eigen::MatrixXd& X, const Labels& y, double lambda, const OptimizerOptions& opts,
                    FitInfo* info, ModelFamily family) {
  opts.validate();
  check_labels(X, y);
  const Eigen::Index m = X.cols();
  const double n = static_cast<double>(X.rows());
  Eigen::VectorXd penalty_diag = Eigen::VectorXd::Constant(m, 2.0 * lambda);
  penalty_diag[m - 1] = 0.0;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd g;
  double f = l2_objective(w, X, y, lambda, &g);
  FitInfo local;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      local.converged = true;
      break;
    }
    Eigen::VectorXd curv(X.rows());
    const Eigen::VectorXd z = X * w;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double p = sigmoid(z[i]);
      curv[i] = p * (1.0 - p);
    }
    Eigen::MatrixXd H = X.transpose() * curv.asDiagonal() * X / n;
    H.diagonal() += penalty_diag;

    // Levenberg shift when the Hessian is singular (collinear one-hot
    // blocks, or vanishing curvature on separable data).
    Eigen::VectorXd step;
    double shift = 0.0;
    const double base = std::max(1e-12, H.diagonal().maxCoeff());
    for (int attempt = 0; attempt < 20; ++attempt) {
      Eigen::MatrixXd Hs = H;
      Hs.diagonal().array() += shift;
      Eigen::LLT<Eigen::MatrixXd> llt(Hs);
      if (llt.info() == Eigen::Success) {
        step = -llt.solve(g);
        if (step.allFinite() && step.dot(g) < 0.0) break;
      }
      shift = shift == 0.0 ? 1e-10 * base : shift * 10.0;
      step.resize(0);
    }
    if (step.size() == 0) step = -g;

    const double slope = step.dot(g);
    double a = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      Eigen::VectorXd wn = w + a * step;
      Eigen::VectorXd gn;
      const double fn = l2_objective(wn, X, y, lambda, &gn);
      if (fn <= f + 1e-4 * a * slope) {
        w = std::move(wn);
        g = std::move(gn);
        f = fn;
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) {
      spdlog::debug("newton: line search stalled at iteration {}, |g|={}", it, g.lpNorm<Eigen::Infinity>());
      break;
    }
  }
  local.iterations = it;
  local.objective = f;
  local.grad_norm = g.lpNorm<Eigen::Infinity>();
  if (!local.converged) {
    spdlog::warn("{}: gradient tolerance not reached (|g|_inf={:.3g} after {} iterations)", to_string(family),
                 local.grad_norm, it);
  }
  if (info) *info = local;
  return {w, family};
}

}  // namespace

void OptimizerOptions::validate() const {
  if (!(grad_tol > 0.0)) throw ConfigError("grad_tol must be > 0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ScoreVector predict_proba(const Eigen::VectorXd& w, const Eigen::MatrixXd& X) {
  check_dims(w, X);
  const Eigen::VectorXd z = X * w;
  ScoreVector p(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    p[i] = std::clamp(sigmoid(z[i]), metrics::kScoreEps, 1.0 - metrics::kScoreEps);
  }
  return p;
}

ScoreVector predict_proba(const WeightVector& w, const Eigen::MatrixXd& X) { return predict_proba(w.w, X); }

double logloss(const Eigen::VectorXd& w, const Eigen::MatrixXd& X, const Labels& y, Eigen::VectorXd* grad) {
  check_dims(w, X);
  if (X.rows() != y.size()) throw DataError("design and labels differ in length");
  const Eigen::VectorXd z = X * w;
  const double n = static_cast<double>(X.rows());
  double f = 0.0;
  Eigen::VectorXd r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // -y ln sigma(z) - (1-y) ln(1 - sigma(z)) = softplus(z) - y z
    f += y[i] == 1 ? softplus(-z[i]) : softplus(z[i]);
    r[i] = sigmoid(z[i]) - y[i];
  }
  if (grad) *grad = X.transpose() * r / n;
  return f / n;
}

double l2_objective(const Eigen::VectorXd& w, const Eigen::MatrixXd& X, const Labels& y, double lambda,
                    Eigen::VectorXd* grad) {
  double f = logloss(w, X, y, grad);
  const Eigen::Index m = w.size();
  f += lambda * w.head(m - 1).squaredNorm();
  if (grad) grad->head(m - 1) += 2.0 * lambda * w.head(m - 1);
  return f;
}

WeightVector fit_lr(const Eigen::MatrixXd& X, const Labels& y, const OptimizerOptions& opts, FitInfo* info) {
  return newton(X, y, 0.0, opts, info, ModelFamily::LR);
}

WeightVector fit_lrl2(const Eigen::MatrixXd& X, const Labels& y, double lambda, const OptimizerOptions& opts,
                      FitInfo* info) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("L2 weight lambda must be finite and >= 0");
  return newton(X, y, lambda, opts, info, ModelFamily::LRL2);
}

double check_gradient(const Objective& f, const Eigen::VectorXd& w0, double h) {
  Eigen::VectorXd g;
  f(w0, &g);
  Eigen::VectorXd fd(w0.size());
  Eigen::VectorXd w = w0;
  for (Eigen::Index j = 0; j < w0.size(); ++j) {
    w[j] = w0[j] + h;
    const double fp = f(w, nullptr);
    w[j] = w0[j] - h;
    const double fm = f(w, nullptr);
    w[j] = w0[j];
    fd[j] = (fp - fm) / (2.0 * h);
  }
  const double scale = std::max({g.lpNorm<Eigen::Infinity>(), fd.lpNorm<Eigen::Infinity>(), 1e-8});
  return (g - fd).lpNorm<Eigen::Infinity>() / scale;
}

}  // namespace rfs::nominal
