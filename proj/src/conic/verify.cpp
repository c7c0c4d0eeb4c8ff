#include <cmath>

#include "rfs/conic.hpp"

namespace rfs::conic {

namespace {

// Distance-like violation of each cone, computed from scratch.

double nonneg_violation(double e) { return std::max(0.0, -e); }

double soc_violation(const std::vector<double>& e) {
  double ss = 0.0;
  for (std::size_t i = 1; i < e.size(); ++i) ss += e[i] * e[i];
  return std::max(0.0, std::sqrt(ss) - e[0]);
}

double exp_violation(double a, double b, double c) {
  if (b < 0.0 || c < 0.0) return std::max(-b, 0.0) + std::max(-c, 0.0) + exp_violation(a, std::max(b, 0.0), std::max(c, 0.0));
  if (b == 0.0) return std::max(0.0, a);
  const double linear = std::max(0.0, b * std::exp(a / b) - c);
  if (c == 0.0) return linear;
  // a <= b log(c/b) measured in a's units.
  const double logarithmic = std::max(0.0, a - b * std::log(c / b));
  return std::min(linear, logarithmic);
}

// Dual exponential cone: u < 0, -u e^(v/u) <= e w; or u = 0, v >= 0, w >= 0.
double dual_exp_violation(double u, double v, double w) {
  if (u >= 0.0) return u + std::max(0.0, -v) + std::max(0.0, -w);
  if (w < 0.0) return -w + dual_exp_violation(u, v, 0.0);
  const double linear = std::max(0.0, -u * std::exp(v / u) - std::exp(1.0) * w);
  if (w == 0.0) return linear;
  // v >= u (1 + log(w / -u)) measured in v's units.
  const double logarithmic = std::max(0.0, u * (1.0 + std::log(w / -u)) - v);
  return std::min(linear, logarithmic);
}

}  // namespace

Certificate verify(const Program& p, const Solution& s) {
  Certificate cert;
  const auto n = static_cast<Eigen::Index>(p.num_vars());
  Eigen::VectorXd stationarity = Eigen::VectorXd::Zero(n);
  for (const auto& [j, c] : p.objective().terms()) stationarity[j] += c;
  double dual_obj = p.objective().constant();

  const auto& blocks = p.blocks();
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& blk = blocks[k];
    const Eigen::VectorXd& dual = s.duals.at(k);
    std::vector<double> e(blk.rows.size());
    for (std::size_t r = 0; r < blk.rows.size(); ++r) {
      e[r] = blk.rows[r].eval(s.x);
      // Zero rows enter the Lagrangian with +y, cone rows with -z.
      const double w = blk.kind == ConeKind::Zero ? dual[static_cast<Eigen::Index>(r)] : -dual[static_cast<Eigen::Index>(r)];
      for (const auto& [j, c] : blk.rows[r].terms()) stationarity[j] += w * c;
      dual_obj += w * blk.rows[r].constant();
    }
    double pv = 0.0, dv = 0.0;
    switch (blk.kind) {
      case ConeKind::Zero:
        for (double v : e) pv = std::max(pv, std::abs(v));
        break;
      case ConeKind::NonNeg:
        for (std::size_t r = 0; r < e.size(); ++r) {
          pv = std::max(pv, nonneg_violation(e[r]));
          dv = std::max(dv, nonneg_violation(dual[static_cast<Eigen::Index>(r)]));
        }
        break;
      case ConeKind::SOC:
        pv = soc_violation(e);
        dv = soc_violation(std::vector<double>(dual.data(), dual.data() + dual.size()));
        break;
      case ConeKind::Exp:
        pv = exp_violation(e[0], e[1], e[2]);
        dv = dual_exp_violation(dual[0], dual[1], dual[2]);
        break;
    }
    cert.primal_violation = std::max(cert.primal_violation, pv);
    cert.dual_cone_violation = std::max(cert.dual_cone_violation, dv);
  }
  cert.dual_residual = n ? stationarity.lpNorm<Eigen::Infinity>() : 0.0;
  cert.primal_objective = p.objective().eval(s.x);
  cert.dual_objective = dual_obj;
  cert.relative_gap = std::abs(cert.primal_objective - cert.dual_objective) / std::max(1.0, std::abs(cert.primal_objective));
  return cert;
}

}  // namespace rfs::conic
