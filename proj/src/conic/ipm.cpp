#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

#include <Eigen/SparseCore>
#include <spdlog/spdlog.h>

#include "cones.hpp"
#include "ldl.hpp"
#include "rfs/conic.hpp"
#include "rfs/error.hpp"

namespace rfs::conic {

namespace {

using detail::ConeLayout;
using SpMat = Eigen::SparseMatrix<double>;

constexpr double kStaticReg = 7e-8;
constexpr double kPivotEps = 1e-13;
constexpr double kDynamicReg = 2e-7;
constexpr int kRefineSteps = 8;
constexpr double kNeighborhood = 0.9;
// Above this proximity a pure centering step is taken before the next predictor.
constexpr double kRecenter = 0.5;
constexpr int kMaxCorrectors = 3;

// min c'x  s.t.  Ax = b,  Gx + s = h,  s in K.
struct StandardForm {
  int n = 0, p = 0, m = 0;
  SpMat A, G;
  Eigen::VectorXd c, b, h;
  double c0 = 0.0;
  ConeLayout layout;
  // Per block: offset into y (Zero) or into the stacked slack (cones).
  std::vector<int> block_offset;
};

StandardForm standardize(const Program& prog) {
  StandardForm f;
  f.n = static_cast<int>(prog.num_vars());
  const auto& blocks = prog.blocks();
  f.block_offset.assign(blocks.size(), 0);

  int lp = 0, eq = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& blk = blocks[k];
    if (blk.kind == ConeKind::Zero) {
      f.block_offset[k] = eq;
      eq += static_cast<int>(blk.rows.size());
    } else if (blk.kind == ConeKind::NonNeg) {
      f.block_offset[k] = lp;
      lp += static_cast<int>(blk.rows.size());
    } else if (blk.kind == ConeKind::SOC) {
      f.layout.soc_dims.push_back(static_cast<int>(blk.rows.size()));
    } else {
      ++f.layout.n_exp;
    }
  }
  f.layout.n_lp = lp;
  f.layout.finalize();
  f.p = eq;
  f.m = f.layout.dim;

  int soc = 0, ex = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].kind == ConeKind::SOC) f.block_offset[k] = f.layout.soc_offsets[static_cast<std::size_t>(soc++)];
    if (blocks[k].kind == ConeKind::Exp) f.block_offset[k] = f.layout.exp_offset + 3 * ex++;
  }

  std::vector<Eigen::Triplet<double>> ta, tg;
  f.b = Eigen::VectorXd::Zero(f.p);
  f.h = Eigen::VectorXd::Zero(f.m);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& blk = blocks[k];
    for (std::size_t r = 0; r < blk.rows.size(); ++r) {
      const int row = f.block_offset[k] + static_cast<int>(r);
      const auto& e = blk.rows[r];
      if (blk.kind == ConeKind::Zero) {
        for (const auto& [j, v] : e.terms()) ta.emplace_back(row, j, v);
        f.b[row] = -e.constant();
      } else {
        for (const auto& [j, v] : e.terms()) tg.emplace_back(row, j, -v);
        f.h[row] = e.constant();
      }
    }
  }
  f.A.resize(f.p, f.n);
  f.A.setFromTriplets(ta.begin(), ta.end());
  f.G.resize(f.m, f.n);
  f.G.setFromTriplets(tg.begin(), tg.end());
  f.A.prune(0.0);
  f.G.prune(0.0);

  f.c = Eigen::VectorXd::Zero(f.n);
  for (const auto& [j, v] : prog.objective().terms()) f.c[j] += v;
  f.c0 = prog.objective().constant();
  return f;
}

/// Newton system with the SOC and exponential slack blocks eliminated
/// through the barrier Hessian H:
///   [[reg + sum_k G_k' mu H_k G_k, A', G_lp'], [A, -reg, 0], [G_lp, 0, -W_lp - reg]]
/// with W_lp = s^2 / mu. Keeping W = H^-1 / mu for the dense blocks instead
/// loses their small eigenvalues to cancellation near the cone boundary.
class Kkt {
 public:
  explicit Kkt(const StandardForm& f) : f_(f) {
    const int n = f.n, p = f.p;
    const auto& L = f.layout;
    N_ = n + p + L.n_lp;
    std::vector<int> rows, cols;
    std::unordered_map<long long, int> slot_of;
    auto slot = [&](int r, int c) {
      const long long key = static_cast<long long>(r) * N_ + c;
      const auto [iter, fresh] = slot_of.try_emplace(key, static_cast<int>(rows.size()));
      if (fresh) {
        rows.push_back(r);
        cols.push_back(c);
        base_.push_back(0.0);
      }
      return iter->second;
    };
    for (int j = 0; j < n; ++j) base_[static_cast<std::size_t>(slot(j, j))] += kStaticReg;

    const Eigen::SparseMatrix<double, Eigen::RowMajor> Gr = f.G;
    auto add_block = [&](int row0, int dim) {
      Block blk;
      blk.row0 = row0;
      blk.dim = dim;
      for (int r = 0; r < dim; ++r)
        for (decltype(Gr)::InnerIterator it(Gr, row0 + r); it; ++it) blk.cols.push_back(static_cast<int>(it.col()));
      std::sort(blk.cols.begin(), blk.cols.end());
      blk.cols.erase(std::unique(blk.cols.begin(), blk.cols.end()), blk.cols.end());
      const auto nc = static_cast<Eigen::Index>(blk.cols.size());
      blk.G = Eigen::MatrixXd::Zero(dim, nc);
      for (int r = 0; r < dim; ++r) {
        for (decltype(Gr)::InnerIterator it(Gr, row0 + r); it; ++it) {
          const auto c = std::lower_bound(blk.cols.begin(), blk.cols.end(), static_cast<int>(it.col())) - blk.cols.begin();
          blk.G(r, c) = it.value();
        }
      }
      for (Eigen::Index b = 0; b < nc; ++b)
        for (Eigen::Index a = 0; a <= b; ++a)
          blk.slots.push_back(slot(blk.cols[static_cast<std::size_t>(b)], blk.cols[static_cast<std::size_t>(a)]));
      blocks_.push_back(std::move(blk));
    };
    for (std::size_t k = 0; k < L.soc_dims.size(); ++k) add_block(L.soc_offsets[k], L.soc_dims[k]);
    for (int k = 0; k < L.n_exp; ++k) add_block(L.exp_offset + 3 * k, 3);

    for (int j = 0; j < f.A.outerSize(); ++j)
      for (SpMat::InnerIterator it(f.A, j); it; ++it) base_[static_cast<std::size_t>(slot(n + static_cast<int>(it.row()), j))] += it.value();
    for (int i = 0; i < p; ++i) base_[static_cast<std::size_t>(slot(n + i, n + i))] -= kStaticReg;
    const SpMat Glp = f.G.topRows(L.n_lp);
    for (int j = 0; j < Glp.outerSize(); ++j)
      for (SpMat::InnerIterator it(Glp, j); it; ++it)
        base_[static_cast<std::size_t>(slot(n + p + static_cast<int>(it.row()), j))] += it.value();
    lp_diag_.resize(static_cast<std::size_t>(L.n_lp));
    for (int i = 0; i < L.n_lp; ++i) lp_diag_[static_cast<std::size_t>(i)] = slot(n + p + i, n + p + i);

    std::vector<int> sign(static_cast<std::size_t>(N_), -1);
    for (int j = 0; j < n; ++j) sign[static_cast<std::size_t>(j)] = 1;
    values_.resize(base_.size());
    ldl_.analyze(N_, rows, cols, std::move(sign));
    spdlog::debug("ipm: reduced system of order {} with {} entries, {} in the factor", N_, rows.size(),
                  ldl_.factor_nonzeros());
  }

  /// Assembles the system at slack s and scale mu and factorizes it.
  bool update(const Eigen::VectorXd& s, double mu) {
    const auto& L = f_.layout;
    const detail::BarrierHessian H = detail::barrier_hessian(L, s);
    values_ = base_;
    w_lp_ = s.head(L.n_lp).array().square() / mu;
    for (int i = 0; i < L.n_lp; ++i) values_[static_cast<std::size_t>(lp_diag_[static_cast<std::size_t>(i)])] -= w_lp_[i] + kStaticReg;
    mh_.resize(L.soc_dims.size());
    mh3_.resize(static_cast<std::size_t>(L.n_exp));
    Eigen::MatrixXd M;
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const Block& blk = blocks_[k];
      if (k < L.soc_dims.size()) {
        mh_[k] = mu * H.soc[k];
        M.noalias() = blk.G.transpose() * mh_[k] * blk.G;
      } else {
        mh3_[k - L.soc_dims.size()] = mu * H.exp[k - L.soc_dims.size()];
        M.noalias() = blk.G.transpose() * mh3_[k - L.soc_dims.size()] * blk.G;
      }
      std::size_t e = 0;
      for (Eigen::Index b = 0; b < M.cols(); ++b)
        for (Eigen::Index a = 0; a <= b; ++a) values_[static_cast<std::size_t>(blk.slots[e++])] += M(a, b);
    }
    return ldl_.factorize(values_, kPivotEps, kDynamicReg);
  }

  /// mu H(s) v at the point of the last update().
  Eigen::VectorXd apply_mh(const Eigen::VectorXd& v) const {
    const int nl = f_.layout.n_lp;
    Eigen::VectorXd out(v.size());
    out.head(nl) = v.head(nl).cwiseQuotient(w_lp_);
    apply_blocks(v, out);
    return out;
  }

  /// Solves A'uy + G'uz = rx, A ux = ry, G ux - W uz = rz - W rs and returns
  /// (ux, uy, uz) stacked.
  Eigen::VectorXd solve(const Eigen::VectorXd& rx, const Eigen::VectorXd& ry, const Eigen::VectorXd& rz,
                        const Eigen::VectorXd& rs) const {
    const int n = f_.n, p = f_.p, nl = f_.layout.n_lp;
    Eigen::VectorXd rhs(N_);
    rhs.segment(n, p) = ry;
    rhs.tail(nl) = rz.head(nl) - w_lp_.cwiseProduct(rs.head(nl));
    Eigen::VectorXd t = Eigen::VectorXd::Zero(f_.m);
    apply_blocks(rz, t);
    t.tail(f_.m - nl) -= rs.tail(f_.m - nl);
    rhs.head(n) = rx + f_.G.transpose() * t;

    Eigen::VectorXd u = rhs;
    ldl_.solve(u);
    const double floor = 1e-13 * (1.0 + rhs.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd r = rhs - multiply(u);
    double err = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < kRefineSteps && err > floor; ++it) {
      ldl_.solve(r);
      Eigen::VectorXd cand = u + r;
      Eigen::VectorXd rc = rhs - multiply(cand);
      const double ec = rc.lpNorm<Eigen::Infinity>();
      if (!(ec < err)) break;
      const bool stalled = ec > 0.5 * err;
      u = std::move(cand);
      r = std::move(rc);
      err = ec;
      if (stalled) break;
    }

    Eigen::VectorXd out(n + p + f_.m);
    out.head(n + p) = u.head(n + p);
    Eigen::VectorXd gx = f_.G * u.head(n) - rz;
    auto uz = out.tail(f_.m);
    apply_blocks(gx, uz);
    uz.head(nl) = u.tail(nl);
    uz.tail(f_.m - nl) += rs.tail(f_.m - nl);
    return out;
  }

 private:
  struct Block {
    int row0 = 0, dim = 0;
    std::vector<int> cols;
    Eigen::MatrixXd G;
    std::vector<int> slots;
  };

  // out_k = mu H_k v_k on the SOC and exponential rows; LP rows untouched.
  template <class Out>
  void apply_blocks(const Eigen::VectorXd& v, Out&& out) const {
    const auto& L = f_.layout;
    std::size_t k = 0;
    for (; k < L.soc_dims.size(); ++k) {
      const Block& blk = blocks_[k];
      out.segment(blk.row0, blk.dim) = mh_[k] * v.segment(blk.row0, blk.dim);
    }
    for (; k < blocks_.size(); ++k) out.template segment<3>(blocks_[k].row0) = mh3_[k - L.soc_dims.size()] * v.segment<3>(blocks_[k].row0);
  }

  // The reduced matrix without regularization.
  Eigen::VectorXd multiply(const Eigen::VectorXd& u) const {
    const int n = f_.n, p = f_.p, nl = f_.layout.n_lp;
    const auto ux = u.head(n);
    const auto uy = u.segment(n, p);
    const auto ul = u.tail(nl);
    const Eigen::VectorXd gx = f_.G * ux;
    Eigen::VectorXd t(f_.m);
    t.head(nl) = ul;
    apply_blocks(gx, t);
    Eigen::VectorXd out(N_);
    out.head(n) = f_.A.transpose() * uy + f_.G.transpose() * t;
    out.segment(n, p) = f_.A * ux;
    out.tail(nl) = gx.head(nl) - w_lp_.cwiseProduct(ul);
    return out;
  }

  const StandardForm& f_;
  int N_ = 0;
  std::vector<Block> blocks_;
  std::vector<int> lp_diag_;
  std::vector<double> base_, values_;
  detail::QuasiDefiniteLdl ldl_;
  Eigen::VectorXd w_lp_;
  std::vector<Eigen::MatrixXd> mh_;
  std::vector<Eigen::Matrix3d> mh3_;
};

struct Point {
  Eigen::VectorXd x, y, z, s;
  double tau = 1.0, kappa = 1.0;
};

struct Direction {
  Eigen::VectorXd x, y, z, s;
  double tau = 0.0, kappa = 0.0;
};

Point step(const Point& p, const Direction& d, double a) {
  Point q;
  q.x = p.x + a * d.x;
  q.y = p.y + a * d.y;
  q.z = p.z + a * d.z;
  q.s = p.s + a * d.s;
  q.tau = p.tau + a * d.tau;
  q.kappa = p.kappa + a * d.kappa;
  return q;
}

/// p + a d + a^2 dd.
Point curve(const Point& p, const Direction& d, const Direction& dd, double a) {
  Point q = step(p, d, a);
  const double a2 = a * a;
  q.x += a2 * dd.x;
  q.y += a2 * dd.y;
  q.z += a2 * dd.z;
  q.s += a2 * dd.s;
  q.tau += a2 * dd.tau;
  q.kappa += a2 * dd.kappa;
  return q;
}

Direction blend(const Direction& a, const Direction& b, double w) {
  return {w * a.x + (1 - w) * b.x, w * a.y + (1 - w) * b.y, w * a.z + (1 - w) * b.z,
          w * a.s + (1 - w) * b.s, w * a.tau + (1 - w) * b.tau, w * a.kappa + (1 - w) * b.kappa};
}

double complementarity(const Point& p, double nu) { return (p.s.dot(p.z) + p.tau * p.kappa) / (nu + 1.0); }

/// Neighborhood measure of the full homogeneous point, or +inf outside the
/// cones.
double proximity(const ConeLayout& L, const Point& p) {
  if (!(p.tau > 0.0) || !(p.kappa > 0.0)) return INFINITY;
  if (!detail::primal_interior(L, p.s) || !detail::dual_interior(L, p.z)) return INFINITY;
  const double mu = complementarity(p, L.nu);
  if (!(mu > 0.0)) return INFINITY;
  return std::max(detail::proximity(L, p.s, p.z, mu), std::abs(p.tau * p.kappa - mu) / mu);
}

struct Residuals {
  Eigen::VectorXd rx, ry, rz;
  double rtau = 0.0;
};

Residuals residuals(const StandardForm& f, const Point& p) {
  Residuals r;
  r.rx = f.A.transpose() * p.y + f.G.transpose() * p.z + f.c * p.tau;
  r.ry = -(f.A * p.x) + f.b * p.tau;
  r.rz = -(f.G * p.x) + f.h * p.tau - p.s;
  r.rtau = -f.c.dot(p.x) - f.b.dot(p.y) - f.h.dot(p.z) - p.kappa;
  return r;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

struct Progress {
  double pres = INFINITY, dres = INFINITY, gap = INFINITY, pobj = 0.0, dobj = 0.0;
};

Progress measure(const StandardForm& f, const Point& p) {
  Progress g;
  const double t = p.tau;
  const Eigen::VectorXd x = p.x / t, y = p.y / t, z = p.z / t, s = p.s / t;
  // Absolute residuals: the certificate contract is stated in absolute terms.
  g.pres = std::max(inf_norm(f.A * x - f.b), inf_norm(f.G * x + s - f.h));
  g.dres = inf_norm(f.A.transpose() * y + f.G.transpose() * z + f.c);
  g.pobj = f.c.dot(x) + f.c0;
  g.dobj = -f.b.dot(y) - f.h.dot(z) + f.c0;
  g.gap = std::max(std::abs(g.pobj - g.dobj), s.dot(z)) / std::max(1.0, std::abs(g.pobj));
  return g;
}

}  // namespace

Solution solve(const Program& prog, const SolveOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  prog.validate();
  if (!(opts.gap_tol > 0.0) || !(opts.feas_tol > 0.0) || opts.max_iter < 1) {
    throw ConfigError("solver tolerances must be positive and max_iter >= 1");
  }
  const StandardForm f = standardize(prog);
  const ConeLayout& L = f.layout;
  Kkt kkt(f);

  Point pt;
  pt.x = Eigen::VectorXd::Zero(f.n);
  pt.y = Eigen::VectorXd::Zero(f.p);
  detail::central_start(L, pt.s, pt.z);

  // Target ten times tighter than requested; the requested tolerances are
  // accepted when progress stalls.
  const double ftol = 0.1 * opts.feas_tol, gtol = 0.1 * opts.gap_tol;

  Solution sol;
  sol.status = Status::MaxIter;
  Progress prog_best;
  Point best = pt;
  bool best_ok = false;
  auto meets = [&](const Progress& g, double ft, double gt) { return g.pres <= ft && g.dres <= ft && g.gap <= gt; };

  int it = 0;
  int correctors = 0;
  for (; it <= opts.max_iter; ++it) {
    const double mu = complementarity(pt, L.nu);
    const Progress g = measure(f, pt);
    spdlog::trace("ipm {:3d}: pobj={:.10g} dobj={:.10g} pres={:.2e} dres={:.2e} gap={:.2e} mu={:.2e} tau={:.2e} kap={:.2e}",
                  it, g.pobj, g.dobj, g.pres, g.dres, g.gap, mu, pt.tau, pt.kappa);
    if (meets(g, opts.feas_tol, opts.gap_tol) &&
        (!best_ok || std::max({g.pres, g.dres, g.gap}) < std::max({prog_best.pres, prog_best.dres, prog_best.gap}))) {
      best = pt;
      prog_best = g;
      best_ok = true;
    }
    if (meets(g, ftol, gtol)) {
      sol.status = Status::Optimal;
      break;
    }
    // Infeasibility certificates.
    const double bz = f.b.dot(pt.y) + f.h.dot(pt.z);
    if (bz < 0.0) {
      const double ray = inf_norm(f.A.transpose() * pt.y + f.G.transpose() * pt.z) / (-bz);
      if (ray <= ftol) {
        sol.status = Status::Infeasible;
        break;
      }
    }
    const double cx = f.c.dot(pt.x);
    if (cx < 0.0) {
      const double ray = std::max(inf_norm(f.A * pt.x), inf_norm(f.G * pt.x + pt.s)) / (-cx);
      if (ray <= ftol) {
        sol.status = Status::Unbounded;
        break;
      }
    }
    if (it == opts.max_iter) break;

    if (!kkt.update(pt.s, mu)) {
      spdlog::debug("ipm: factorization failed at iteration {}", it);
      break;
    }

    const Residuals r = residuals(f, pt);
    const Eigen::VectorXd grad = detail::gradient(L, pt.s);
    const int n = f.n, p = f.p, m = f.m;
    const Eigen::VectorXd u1 = kkt.solve(-f.c, f.b, f.h, Eigen::VectorXd::Zero(m));

    // Newton direction for the residual fraction eta, the cone right-hand
    // side dz + mu H ds = rs and the pair right-hand side tau dkappa + kappa dtau = rk.
    auto direction = [&](double eta, const Eigen::VectorXd& rs, double rk) {
      const Eigen::VectorXd u2 = kkt.solve(-eta * r.rx, eta * r.ry, eta * r.rz, rs);
      const double num = -eta * r.rtau + rk / pt.tau + f.c.dot(u2.head(n)) + f.b.dot(u2.segment(n, p)) +
                         f.h.dot(u2.tail(m));
      const double den = pt.kappa / pt.tau - f.c.dot(u1.head(n)) - f.b.dot(u1.segment(n, p)) - f.h.dot(u1.tail(m));
      Direction d;
      d.tau = num / den;
      const Eigen::VectorXd u = u2 + d.tau * u1;
      d.x = u.head(n);
      d.y = u.segment(n, p);
      d.z = u.tail(m);
      // Equal to W (rs - dz) in exact arithmetic; this form keeps the primal rows consistent.
      d.s = f.h * d.tau - f.G * d.x + eta * r.rz;
      d.kappa = (rk - pt.kappa * d.tau) / pt.tau;
      return d;
    };
    // Predictor and centering directions, each with the second-order term
    // of its path so that steps follow p + a d + a^2 dd.
    const Direction pred = direction(1.0, -pt.z, -pt.kappa * pt.tau);
    const Direction cent = direction(0.0, -pt.z - mu * grad, -pt.kappa * pt.tau + mu);
    const Direction pred2 = direction(0.0, kkt.apply_mh(pred.s) - 0.5 * mu * detail::third_order(L, pt.s, pred.s),
                                      -pred.tau * pred.kappa);
    const Direction cent2 = direction(0.0, -0.5 * mu * detail::third_order(L, pt.s, cent.s), -cent.tau * cent.kappa);
    auto finite = [](const Direction& d) { return std::isfinite(d.tau) && std::isfinite(d.kappa) && d.x.allFinite() && d.z.allFinite(); };
    if (!finite(pred) || !finite(cent) || !finite(pred2) || !finite(cent2)) {
      spdlog::debug("ipm: non-finite search direction at iteration {}", it);
      break;
    }

    const double prox0 = proximity(L, pt);
    Point next;
    double best_score = 0.0;
    if (prox0 > kRecenter && correctors < kMaxCorrectors) {
      // Corrector: the step length that brings the point closest to the central path.
      double best_prox = prox0;
      for (double alpha = 1.0; alpha > 1e-3; alpha *= 0.7) {
        Point q = curve(pt, cent, cent2, alpha);
        const double pq = proximity(L, q);
        if (pq < best_prox) {
          best_prox = pq;
          next = std::move(q);
        } else if (best_prox < prox0) {
          break;
        }
      }
      if (best_prox < prox0) {
        ++correctors;
        spdlog::trace("  corrector proximity {:.3g} -> {:.3g}", prox0, best_prox);
        pt = std::move(next);
        continue;
      }
    }
    correctors = 0;

    // Search over blends of the two curves and step lengths for the
    // largest reduction a * alpha that stays in the neighborhood.
    static constexpr double kBlend[] = {1.0, 0.99, 0.97, 0.95, 0.9, 0.85, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
    for (double a : kBlend) {
      if (a <= best_score) break;
      const Direction d = blend(pred, cent, a);
      const Direction dd = blend(pred2, cent2, a);
      for (double alpha = 1.0; alpha * a > best_score && alpha > 1e-4; alpha *= 0.8) {
        Point q = curve(pt, d, dd, alpha);
        if (proximity(L, q) <= kNeighborhood) {
          best_score = alpha * a;
          next = std::move(q);
          break;
        }
      }
    }
    if (best_score == 0.0) {
      // Pure centering with backtracking on the neighborhood measure.
      for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
        Point q = step(pt, cent, alpha);
        if (proximity(L, q) < prox0) {
          next = std::move(q);
          best_score = -1.0;
          break;
        }
      }
    }
    if (best_score == 0.0) {
      spdlog::debug("ipm: no acceptable step at iteration {} (proximity {:.3g})", it, proximity(L, pt));
      break;
    }
    spdlog::trace("  step score {:.3g} proximity {:.3g}", best_score, proximity(L, next));
    pt = std::move(next);
    // Keep the homogeneous scale bounded.
    const double scale = pt.tau + pt.kappa;
    if (scale > 1e8 || scale < 1e-8) {
      pt.x /= scale;
      pt.y /= scale;
      pt.z /= scale;
      pt.s /= scale;
      pt.tau /= scale;
      pt.kappa /= scale;
    }
  }

  if (sol.status != Status::Optimal && sol.status != Status::Infeasible && sol.status != Status::Unbounded && best_ok) {
    pt = best;
    sol.status = Status::Optimal;
  }

  sol.iterations = it;
  const auto& blocks = prog.blocks();
  sol.duals.resize(blocks.size());
  double xs = 1.0, ys = 1.0;
  if (sol.status == Status::Optimal || sol.status == Status::MaxIter) {
    xs = ys = 1.0 / pt.tau;
  } else if (sol.status == Status::Infeasible) {
    xs = 0.0;
    ys = 1.0 / -(f.b.dot(pt.y) + f.h.dot(pt.z));
  } else {
    xs = 1.0 / -f.c.dot(pt.x);
    ys = 0.0;
  }
  sol.x = pt.x * xs;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const int off = f.block_offset[k];
    const auto len = static_cast<Eigen::Index>(blocks[k].rows.size());
    sol.duals[k] = (blocks[k].kind == ConeKind::Zero ? pt.y.segment(off, len) : pt.z.segment(off, len)) * ys;
  }
  const Progress g = measure(f, pt);
  sol.primal_objective = g.pobj;
  sol.dual_objective = g.dobj;
  sol.relative_gap = g.gap;
  sol.primal_residual = g.pres;
  sol.dual_residual = g.dres;
  sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  sol.message = to_string(sol.status) + " after " + std::to_string(it) + " iterations";
  spdlog::debug("ipm: {} (pobj={:.10g}, gap={:.2e}, pres={:.2e}, dres={:.2e}, {:.3f}s)", sol.message, g.pobj, g.gap,
                g.pres, g.dres, sol.seconds);
  return sol;
}

}  // namespace rfs::conic
