#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "rfs/dro.hpp"
#include "rfs/error.hpp"
#include "terms.hpp"

namespace rfs::dro {

using conic::Affine;
using conic::Var;

namespace {

double nan_or(const std::optional<Var>& v, const conic::Solution& s) {
  return v ? s.value(*v) : std::numeric_limits<double>::quiet_NaN();
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

double eta_max(const MarginalTable& m) { return std::min(m.at(0, 1), m.at(1, 1)); }

nlohmann::json DroDiagnostics::to_json() const {
  nlohmann::json j;
  j["status"] = conic::to_string(status);
  j["objective"] = objective;
  j["zero_features"] = zero_features;
  j["psi"] = finite_or_null(psi);
  j["psi_s"] = {finite_or_null(psi_s[0]), finite_or_null(psi_s[1])};
  auto& m = j["mu"] = nlohmann::json::array();
  for (double v : mu) m.push_back(finite_or_null(v));
  j["t"] = finite_or_null(t);
  j["iterations"] = iterations;
  j["certificate"] = {{"primal_violation", certificate.primal_violation},
                      {"dual_cone_violation", certificate.dual_cone_violation},
                      {"dual_residual", certificate.dual_residual},
                      {"relative_gap", certificate.relative_gap}};
  return j;
}

namespace detail {

void check_design(const Eigen::MatrixXd& X, const Labels& y) {
  if (X.rows() != y.size()) throw DataError("design and labels differ in length");
  if (X.cols() < 1) throw DataError("design needs at least the intercept column");
  if (!X.allFinite()) throw DataError("design has non-finite entries");
  const auto pos = (y.array() == 1).count();
  if (((y.array() != 0) && (y.array() != 1)).any()) throw DataError("labels must be 0/1");
  if (pos == 0 || pos == y.size()) throw DataError("both classes must be present to fit a model");
}

std::vector<Affine> scores(const Eigen::MatrixXd& X, const std::vector<Var>& w) {
  std::vector<Affine> z(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (X(i, j) != 0.0) z[static_cast<std::size_t>(i)].add(w[static_cast<std::size_t>(j)], X(i, j));
    }
  }
  return z;
}

std::vector<Affine> feature_weights(const std::vector<Var>& w) {
  return std::vector<Affine>(w.begin(), w.end() - 1);
}

}  // namespace detail

DroProgram build_drlr(const Eigen::MatrixXd& X, const Labels& y, double rho, double kappa_y) {
  detail::check_design(X, y);
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ValidationError("rho must be finite and >= 0");
  if (!(kappa_y >= 0.0)) throw ValidationError("kappa_y must be >= 0 or inf");

  DroProgram out;
  auto& p = out.program;
  const auto n = static_cast<std::size_t>(X.rows());
  out.w = p.add_vars(static_cast<std::size_t>(X.cols()), "w");
  const auto d = p.add_vars(n, "d");
  const auto z = detail::scores(X, out.w);

  Affine objective;
  for (const Var& di : d) objective.add(di, 1.0 / static_cast<double>(n));

  // With rho = 0 the radius multiplier is free at no cost, so flip rows with
  // a positive cost can always be slackened away: drop them and psi.
  const bool flips = std::isfinite(kappa_y) && (rho > 0.0 || kappa_y == 0.0);
  if (rho > 0.0) {
    out.psi = p.add_var("psi");
    objective.add(*out.psi, rho);
    conic::add_norm_epigraph(p, detail::feature_weights(out.w), *out.psi, 1.0, "norm");
  }
  for (std::size_t i = 0; i < n; ++i) {
    // loss(x, 1) = softplus(-z), loss(x, 0) = softplus(z).
    const Affine own = y[static_cast<Eigen::Index>(i)] == 1 ? -z[i] : z[i];
    conic::add_softplus_epigraph(p, own, d[i], "loss" + std::to_string(i));
    if (flips) {
      Affine slack = d[i];
      if (out.psi && kappa_y > 0.0) slack.add(*out.psi, kappa_y);
      conic::add_softplus_epigraph(p, -own, slack, "flip" + std::to_string(i));
    }
  }
  p.minimize(objective);
  return out;
}

DroFit solve_program(const DroProgram& prog, ModelFamily family, const conic::SolveOptions& opts) {
  const conic::Solution sol = conic::solve(prog.program, opts);
  DroFit fit;
  auto& dg = fit.diagnostics;
  dg.status = sol.status;
  dg.iterations = sol.iterations;
  dg.seconds = sol.seconds;
  if (sol.status != conic::Status::Optimal) {
    throw SolverError(std::string(to_string(family)) + ": conic solve ended with status " +
                      conic::to_string(sol.status) + " (" + sol.message + ")");
  }
  dg.certificate = conic::verify(prog.program, sol);
  if (!dg.certificate.passes(opts.feas_tol, opts.gap_tol)) {
    throw SolverError(std::string(to_string(family)) + ": solution failed verification (primal " +
                      std::to_string(dg.certificate.primal_violation) + ", dual " +
                      std::to_string(std::max(dg.certificate.dual_cone_violation, dg.certificate.dual_residual)) +
                      ", gap " + std::to_string(dg.certificate.relative_gap) + ")");
  }
  dg.objective = dg.certificate.primal_objective;
  dg.psi = nan_or(prog.psi, sol);
  dg.psi_s = {nan_or(prog.psi_s[0], sol), nan_or(prog.psi_s[1], sol)};
  for (std::size_t k = 0; k < 8; ++k) dg.mu[k] = nan_or(prog.mu[k], sol);
  dg.t = nan_or(prog.t, sol);

  fit.weights.family = family;
  fit.weights.w.resize(static_cast<Eigen::Index>(prog.w.size()));
  for (std::size_t j = 0; j < prog.w.size(); ++j) fit.weights.w[static_cast<Eigen::Index>(j)] = sol.value(prog.w[j]);
  // An interior-point iterate never lands exactly on w_feat = 0; residue of
  // order 1e-10 would still rank the scores.
  auto feat = fit.weights.w.head(fit.weights.w.size() - 1);
  if (feat.size() > 0 && feat.norm() <= kZeroFeatureNorm) {
    feat.setZero();
    dg.zero_features = true;
  }
  spdlog::debug("{}: objective {:.10g} in {} iterations ({:.2f}s)", to_string(family), dg.objective, dg.iterations,
                dg.seconds);
  return fit;
}

DroFit fit_drlr(const Eigen::MatrixXd& X, const Labels& y, const HyperParams& hp, const conic::SolveOptions& opts) {
  return solve_program(build_drlr(X, y, hp.rho, hp.label_cost()), ModelFamily::DRLR, opts);
}

}  // namespace rfs::dro
