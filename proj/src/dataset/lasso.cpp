#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "rfs/dataset.hpp"
#include "rfs/error.hpp"

namespace rfs::data {

namespace {

constexpr double kFirstOrderTol = 1e-8;
constexpr double kSurvivorThreshold = 1e-10;
constexpr int kMaxIterations = 500;
constexpr int kMaxSweeps = 10000;

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Smooth {
  const Eigen::MatrixXd& X;
  Eigen::VectorXd yd;
  double n;

  double value(const Eigen::VectorXd& w, Eigen::VectorXd* grad) const {
    const Eigen::VectorXd z = X * w;
    double f = 0.0;
    Eigen::VectorXd r(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      f += softplus(z[i]) - yd[i] * z[i];
      r[i] = sigmoid(z[i]) - yd[i];
    }
    if (grad) *grad = X.transpose() * r / n;
    return f / n;
  }
};

Eigen::VectorXd prox(const Eigen::VectorXd& v, double thresh) {
  Eigen::VectorXd out = v;
  for (Eigen::Index j = 0; j + 1 < v.size(); ++j) {
    const double a = std::abs(v[j]) - thresh;
    out[j] = a > 0 ? std::copysign(a, v[j]) : 0.0;
  }
  return out;
}

double l1(const Eigen::VectorXd& w) { return w.head(w.size() - 1).lpNorm<1>(); }

void check_finite(const Eigen::MatrixXd& X) {
  if (!X.allFinite()) throw DataError("lasso: design matrix has non-finite entries");
}

std::vector<bool> survivors(const Eigen::VectorXd& w) {
  std::vector<bool> mask(static_cast<std::size_t>(w.size()));
  for (Eigen::Index j = 0; j < w.size(); ++j) mask[static_cast<std::size_t>(j)] = std::abs(w[j]) > kSurvivorThreshold;
  mask.back() = true;
  return mask;
}

}  // namespace

double l1_logistic_objective(const Eigen::VectorXd& w, const Eigen::MatrixXd& X, const Labels& y,
                             double lambda, Eigen::VectorXd* grad) {
  Smooth f{X, y.cast<double>(), static_cast<double>(X.rows())};
  const double v = f.value(w, grad) + lambda * l1(w);
  if (grad) {
    for (Eigen::Index j = 0; j + 1 < w.size(); ++j) {
      (*grad)[j] += lambda * (w[j] > 0 ? 1.0 : (w[j] < 0 ? -1.0 : 0.0));
    }
  }
  return v;
}

double lasso_lambda_max(const Eigen::MatrixXd& X, const Labels& y) {
  const Eigen::VectorXd yd = y.cast<double>();
  const Eigen::VectorXd r = yd.array() - yd.mean();
  const Eigen::VectorXd g = X.leftCols(X.cols() - 1).transpose() * r / static_cast<double>(X.rows());
  return g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
}

LassoResult lasso_fit(const Eigen::MatrixXd& X, const Labels& y, double lambda,
                      const Eigen::VectorXd* warm_start) {
  check_finite(X);
  if (!(lambda >= 0.0)) throw ConfigError("lasso lambda must be >= 0");
  const Eigen::Index m = X.cols();
  Smooth f{X, y.cast<double>(), static_cast<double>(X.rows())};

  Eigen::VectorXd w;
  if (warm_start) {
    w = *warm_start;
  } else {
    w = Eigen::VectorXd::Zero(m);
    const double ybar = std::clamp(f.yd.mean(), 1e-6, 1.0 - 1e-6);
    w[m - 1] = std::log(ybar / (1.0 - ybar));
  }

  // Proximal Newton: each step minimizes the second-order model of the smooth
  // part plus the L1 term by cyclic coordinate descent, then backtracks on
  // the true objective. Stops on the unit-step prox-gradient residual.
  LassoResult res;
  res.lambda = lambda;
  Eigen::VectorXd grad;
  double obj = f.value(w, &grad) + lambda * l1(w);
  for (int it = 1; it <= kMaxIterations; ++it) {
    const double residual = (w - prox(w - grad, lambda)).lpNorm<Eigen::Infinity>();
    if (residual <= kFirstOrderTol) {
      res.converged = true;
      break;
    }
    res.iterations = it;

    const Eigen::VectorXd z = X * w;
    Eigen::VectorXd curv(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double p = sigmoid(z[i]);
      curv[i] = std::max(p * (1.0 - p), 1e-10) / f.n;
    }
    const Eigen::MatrixXd H = X.transpose() * curv.asDiagonal() * X;

    // Coordinate descent on g'd + d'Hd/2 + lambda |w + d|_1 over u = w + d.
    Eigen::VectorXd u = w, Hd = Eigen::VectorXd::Zero(m);
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      double change = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        const double hjj = H(j, j);
        if (!(hjj > 0.0)) continue;
        const double v = u[j] - (grad[j] + Hd[j]) / hjj;
        double next = v;
        if (j + 1 < m) {
          const double a = std::abs(v) - lambda / hjj;
          next = a > 0.0 ? std::copysign(a, v) : 0.0;
        }
        const double delta = next - u[j];
        if (delta != 0.0) {
          u[j] = next;
          Hd += delta * H.col(j);
          change = std::max(change, std::abs(delta) * std::sqrt(hjj));
        }
      }
      if (change <= 1e-13) break;
    }

    const Eigen::VectorXd d = u - w;
    const double decrease = grad.dot(d) + lambda * (l1(u) - l1(w));
    double step = 1.0;
    Eigen::VectorXd w_new, grad_new;
    double obj_new = obj;
    for (int ls = 0; ls < 60; ++ls) {
      w_new = w + step * d;
      obj_new = f.value(w_new, &grad_new) + lambda * l1(w_new);
      if (obj_new <= obj + 1e-4 * step * decrease + 1e-15 * std::abs(obj)) break;
      step *= 0.5;
    }
    if (!(obj_new <= obj + 1e-15 * std::abs(obj))) break;  // no progress possible in floating point
    w = std::move(w_new);
    grad = std::move(grad_new);
    obj = obj_new;
  }
  if (!res.converged) {
    spdlog::warn("lasso: first-order tolerance not reached after {} iterations (lambda={})",
                 res.iterations, lambda);
  }
  res.weights = w;
  res.mask = survivors(w);
  return res;
}

LassoResult lasso_select(const Eigen::MatrixXd& X, const Labels& y, double lambda) {
  check_finite(X);
  if (lambda == 0.0) {
    LassoResult res;
    res.mask.assign(static_cast<std::size_t>(X.cols()), true);
    res.lambda = 0.0;
    res.converged = true;
    return res;
  }
  return lasso_fit(X, y, lambda);
}

LassoResult lasso_select_auto(const Eigen::MatrixXd& X, const Labels& y, int min_features) {
  check_finite(X);
  const auto m_feat = static_cast<long>(X.cols()) - 1;
  const long needed = std::min<long>(min_features, m_feat);
  const double lmax = lasso_lambda_max(X, y);

  std::optional<Eigen::VectorXd> warm;
  for (int k = 0; k < 10 && lmax > 0.0; ++k) {
    const double lambda = lmax * std::pow(10.0, -3.0 * k / 9.0);
    LassoResult r = lasso_fit(X, y, lambda, warm ? &*warm : nullptr);
    const long kept = std::count(r.mask.begin(), r.mask.end() - 1, true);
    if (kept >= needed) return r;
    warm = r.weights;
  }
  return lasso_select(X, y, 0.0);
}

}  // namespace rfs::data
