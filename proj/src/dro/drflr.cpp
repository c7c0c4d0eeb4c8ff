#include <cmath>
#include <limits>

#include "rfs/dataset.hpp"
#include "rfs/dro.hpp"
#include "rfs/error.hpp"
#include "terms.hpp"

namespace rfs::dro {

using conic::Affine;
using conic::Var;

namespace {

std::size_t mu_index(int sp, int s, int y) { return static_cast<std::size_t>(4 * sp + 2 * s + y); }

/// Multiplier of loss(x, y_b) in the outer row s' for a point moved to cell
/// (s_b, y_b). The s' row carries +eta E[-log h | s', 1] - eta E[-log h | 1-s', 1],
/// so defaulters of group s' weigh 1 + eta / p_s'1 and defaulters of the other
/// group 1 - eta / p_(1-s')1.
double branch_coef(int sp, int sb, int yb, double eta, const MarginalTable& m) {
  if (yb == 0 || eta == 0.0) return 1.0;
  return sb == sp ? 1.0 + eta / m.at(sp, 1) : 1.0 - eta / m.at(sb, 1);
}

void validate(const HyperParams& hp, const MarginalTable& m) {
  if (!(hp.rho >= 0.0) || !std::isfinite(hp.rho)) throw ValidationError("rho must be finite and >= 0");
  if (!(hp.kappa_s >= 0.0)) throw ValidationError("kappa_s must be >= 0 or inf");
  if (!(hp.kappa_y >= 0.0)) throw ValidationError("kappa_y must be >= 0 or inf");
  const double bound = eta_max(m);
  if (!(hp.eta >= 0.0) || hp.eta > bound) {
    throw ValidationError("eta = " + std::to_string(hp.eta) + " outside [0, eta_max = " + std::to_string(bound) +
                          "] (min of the defaulter cell proportions)");
  }
}

}  // namespace

DroProgram build_drflr(const Eigen::MatrixXd& X, const Labels& y, const GroupVector& s, const HyperParams& hp) {
  detail::check_design(X, y);
  if (s.size() != y.size()) throw DataError("groups and labels differ in length");
  const MarginalTable m = data::marginals(y, s);
  validate(hp, m);

  DroProgram out;
  auto& p = out.program;
  const auto n = static_cast<std::size_t>(X.rows());
  const double inv_n = 1.0 / static_cast<double>(n);
  const double kappa_y = hp.label_cost();
  out.w = p.add_vars(static_cast<std::size_t>(X.cols()), "w");
  const auto z = detail::scores(X, out.w);
  const auto w_feat = detail::feature_weights(out.w);
  out.t = p.add_var("t");

  // Shared loss epigraphs: P_i >= loss(x_i, 0), N_i >= loss(x_i, 1). Every
  // branch uses them with a nonnegative multiplier, so the relaxation is tight.
  const auto P = p.add_vars(n, "P");
  const auto N = p.add_vars(n, "N");
  for (std::size_t i = 0; i < n; ++i) {
    conic::add_softplus_epigraph(p, z[i], P[i], "P" + std::to_string(i));
    conic::add_softplus_epigraph(p, -z[i], N[i], "N" + std::to_string(i));
  }

  auto cost = [&](int sb, int yb, std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    double c = 0.0;
    if (sb != s[ii]) c += hp.kappa_s;
    if (yb != y[ii]) c += kappa_y;
    return c;
  };

  // With rho = 0, psi is free at no cost: branches with a positive transport
  // cost are slack and psi, the norm rows and those branches are dropped.
  // If in addition every surviving branch stays in its own cell, the cell
  // multipliers cancel against the cell masses and are eliminated too.
  const bool robust = hp.rho > 0.0;
  const bool zero_cost_moves = hp.kappa_s == 0.0 || kappa_y == 0.0;
  const bool with_mu = robust || zero_cost_moves;

  for (int sp = 0; sp < 2; ++sp) {
    Affine row = Affine(*out.t);
    std::optional<Var> psi;
    if (robust) {
      psi = p.add_var("psi" + std::to_string(sp));
      out.psi_s[static_cast<std::size_t>(sp)] = psi;
      row.add(*psi, -hp.rho);
      // The largest loss multiplier of the row sets the Lipschitz bound.
      const double scale = m.at(sp, 1) > 0.0 ? 1.0 + hp.eta / m.at(sp, 1) : 1.0;
      conic::add_norm_epigraph(p, w_feat, *psi, scale, "norm" + std::to_string(sp));
    }
    if (with_mu) {
      for (int sb = 0; sb < 2; ++sb) {
        for (int yb = 0; yb < 2; ++yb) {
          if (m.at(sb, yb) == 0.0) continue;  // no mass may move into an empty cell
          const Var mu = p.add_var("mu" + std::to_string(sp) + std::to_string(sb) + std::to_string(yb));
          out.mu[mu_index(sp, sb, yb)] = mu;
          row.add(mu, -m.at(sb, yb));
        }
      }
    }

    const auto d = p.add_vars(n, "d" + std::to_string(sp));
    for (std::size_t i = 0; i < n; ++i) {
      row.add(d[i], -inv_n);
      const auto ii = static_cast<Eigen::Index>(i);
      if (!with_mu) {
        // d >= coef * loss(x_i, y_i)
        const double coef = branch_coef(sp, s[ii], y[ii], hp.eta, m);
        Affine r = Affine(d[i]);
        if (coef != 0.0) r.add(y[ii] == 1 ? N[i] : P[i], -coef);
        p.add_nonneg(r, "branch");
        continue;
      }
      for (int sb = 0; sb < 2; ++sb) {
        for (int yb = 0; yb < 2; ++yb) {
          if (m.at(sb, yb) == 0.0) continue;
          const double c = cost(sb, yb, i);
          if (!std::isfinite(c)) continue;
          if (!robust && c > 0.0) continue;
          // d_s'i >= coef * loss(x_i, y_b) - psi_s' * cost - mu_s' s_b y_b
          const double coef = branch_coef(sp, sb, yb, hp.eta, m);
          Affine r = Affine(d[i]);
          if (coef != 0.0) r.add(yb == 1 ? N[i] : P[i], -coef);
          if (psi && c > 0.0) r.add(*psi, c);
          r.add(*out.mu[mu_index(sp, sb, yb)], 1.0);
          p.add_nonneg(r, "branch");
        }
      }
    }
    p.add_nonneg(row, "outer" + std::to_string(sp));
  }
  p.minimize(Affine(*out.t));
  return out;
}

DroFit fit_drflr(const Eigen::MatrixXd& X, const Labels& y, const GroupVector& s, const HyperParams& hp,
                 const conic::SolveOptions& opts) {
  return solve_program(build_drflr(X, y, s, hp), ModelFamily::DRFLR, opts);
}

DroFit fit_flr(const Eigen::MatrixXd& X, const Labels& y, const GroupVector& s, double eta,
               const conic::SolveOptions& opts) {
  HyperParams hp;
  hp.rho = 0.0;
  hp.eta = eta;
  return solve_program(build_drflr(X, y, s, hp), ModelFamily::FLR, opts);
}

}  // namespace rfs::dro
