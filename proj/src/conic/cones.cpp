#include "cones.hpp"

#include <cmath>

namespace rfs::conic {

namespace expcone {

bool primal_interior(const Vec3& s) {
  const double a = s[0], b = s[1], c = s[2];
  if (!(b > 0.0) || !(c > 0.0)) return false;
  const double psi = b * std::log(c / b) - a;
  return psi > 0.0 && std::isfinite(psi);
}

bool dual_interior(const Vec3& z) {
  const double u = z[0], v = z[1], w = z[2];
  if (!(u < 0.0) || !(w > 0.0)) return false;
  return std::log(-u) + v / u < 1.0 + std::log(w);
}

Vec3 gradient(const Vec3& s) {
  const double a = s[0], b = s[1], c = s[2];
  const double lcb = std::log(c / b);
  const double psi = b * lcb - a;
  return {1.0 / psi, -(lcb - 1.0) / psi - 1.0 / b, -(b / c) / psi - 1.0 / c};
}

Mat3 hessian(const Vec3& s) {
  const double a = s[0], b = s[1], c = s[2];
  const double lcb = std::log(c / b);
  const double psi = b * lcb - a;
  const double dpsi[3] = {-1.0, lcb - 1.0, b / c};
  // Second derivatives of psi: only the (b, c) block is nonzero.
  const double d2[3][3] = {{0.0, 0.0, 0.0}, {0.0, -1.0 / b, 1.0 / c}, {0.0, 1.0 / c, -b / (c * c)}};
  Mat3 H{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) H[i][j] = dpsi[i] * dpsi[j] / (psi * psi) - d2[i][j] / psi;
  }
  H[1][1] += 1.0 / (b * b);
  H[2][2] += 1.0 / (c * c);
  return H;
}

const Vec3& central_point() {
  static const Vec3 point = [] {
    Eigen::Vector3d s(-0.8278, 0.8051, 1.2909);
    for (int it = 0; it < 50; ++it) {
      const Vec3 p{s[0], s[1], s[2]};
      const Vec3 g = gradient(p);
      const Mat3 H = hessian(p);
      Eigen::Vector3d F(s[0] + g[0], s[1] + g[1], s[2] + g[2]);
      if (F.norm() < 1e-15) break;
      Eigen::Matrix3d J;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) J(i, j) = (i == j ? 1.0 : 0.0) + H[i][j];
      s -= J.partialPivLu().solve(F);
    }
    return Vec3{s[0], s[1], s[2]};
  }();
  return point;
}

}  // namespace expcone

namespace detail {

namespace {

expcone::Vec3 triple(const Eigen::VectorXd& v, int off) { return {v[off], v[off + 1], v[off + 2]}; }

double soc_det(const Eigen::VectorXd& s, int off, int dim) {
  const double t = s[off];
  return t * t - s.segment(off + 1, dim - 1).squaredNorm();
}

Eigen::MatrixXd soc_hinv(const Eigen::VectorXd& s, int off, int dim) {
  const Eigen::VectorXd x = s.segment(off, dim);
  const double d = soc_det(s, off, dim);
  Eigen::MatrixXd M = x * x.transpose();
  M(0, 0) -= 0.5 * d;
  for (int i = 1; i < dim; ++i) M(i, i) += 0.5 * d;
  return M;
}

// Closed form of the inverse barrier Hessian; inverting the Hessian itself
// loses all accuracy near the boundary.
Eigen::Matrix3d exp_hinv(const expcone::Vec3& s) {
  const double b = s[1], c = s[2];
  const double l = std::log(c / b);
  const double psi = b * l - s[0];
  const double den = 2.0 * b + psi;
  Eigen::Matrix3d M;
  M(0, 0) = (b * b * b * l * l + b * b * l * l * psi - 2.0 * b * b * l * psi + 2.0 * b * b * psi + 2.0 * b * psi * psi +
             psi * psi * psi) / den;
  M(0, 1) = b * b * (b * l + l * psi - psi) / den;
  M(0, 2) = b * c * (b * l + psi) / den;
  M(1, 1) = b * b * (b + psi) / den;
  M(1, 2) = b * b * c / den;
  M(2, 2) = c * c * (b + psi) / den;
  M(1, 0) = M(0, 1);
  M(2, 0) = M(0, 2);
  M(2, 1) = M(1, 2);
  return M;
}

}  // namespace

void ConeLayout::finalize() {
  soc_offsets.clear();
  int off = n_lp;
  for (int d : soc_dims) {
    soc_offsets.push_back(off);
    off += d;
  }
  exp_offset = off;
  dim = off + 3 * n_exp;
  nu = n_lp + 2.0 * static_cast<double>(soc_dims.size()) + 3.0 * n_exp;
}

bool primal_interior(const ConeLayout& L, const Eigen::VectorXd& s) {
  for (int i = 0; i < L.n_lp; ++i) {
    if (!(s[i] > 0.0)) return false;
  }
  for (std::size_t k = 0; k < L.soc_dims.size(); ++k) {
    const int off = L.soc_offsets[k];
    if (!(s[off] > 0.0) || !(soc_det(s, off, L.soc_dims[k]) > 0.0)) return false;
  }
  for (int k = 0; k < L.n_exp; ++k) {
    if (!expcone::primal_interior(triple(s, L.exp_offset + 3 * k))) return false;
  }
  return true;
}

bool dual_interior(const ConeLayout& L, const Eigen::VectorXd& z) {
  for (int i = 0; i < L.n_lp; ++i) {
    if (!(z[i] > 0.0)) return false;
  }
  for (std::size_t k = 0; k < L.soc_dims.size(); ++k) {
    const int off = L.soc_offsets[k];
    if (!(z[off] > 0.0) || !(soc_det(z, off, L.soc_dims[k]) > 0.0)) return false;
  }
  for (int k = 0; k < L.n_exp; ++k) {
    if (!expcone::dual_interior(triple(z, L.exp_offset + 3 * k))) return false;
  }
  return true;
}

Eigen::VectorXd gradient(const ConeLayout& L, const Eigen::VectorXd& s) {
  Eigen::VectorXd g(L.dim);
  for (int i = 0; i < L.n_lp; ++i) g[i] = -1.0 / s[i];
  for (std::size_t k = 0; k < L.soc_dims.size(); ++k) {
    const int off = L.soc_offsets[k], dim = L.soc_dims[k];
    const double d = soc_det(s, off, dim);
    g[off] = -2.0 * s[off] / d;
    g.segment(off + 1, dim - 1) = 2.0 * s.segment(off + 1, dim - 1) / d;
  }
  for (int k = 0; k < L.n_exp; ++k) {
    const int off = L.exp_offset + 3 * k;
    const auto gk = expcone::gradient(triple(s, off));
    for (int i = 0; i < 3; ++i) g[off + i] = gk[i];
  }
  return g;
}

HessianInverse hessian_inverse(const ConeLayout& L, const Eigen::VectorXd& s) {
  HessianInverse out;
  out.lp = s.head(L.n_lp).array().square();
  for (std::size_t k = 0; k < L.soc_dims.size(); ++k) out.soc.push_back(soc_hinv(s, L.soc_offsets[k], L.soc_dims[k]));
  for (int k = 0; k < L.n_exp; ++k) out.exp.push_back(exp_hinv(triple(s, L.exp_offset + 3 * k)));
  return out;
}

BarrierHessian barrier_hessian(const ConeLayout& L, const Eigen::VectorXd& s) {
  BarrierHessian out;
  for (std::size_t k = 0; k < L.soc_dims.size(); ++k) {
    const int off = L.soc_offsets[k], dim = L.soc_dims[k];
    const double d = soc_det(s, off, dim);
    // -2 J / d + 4 (J x)(J x)' / d^2
    Eigen::VectorXd jx = -s.segment(off, dim);
    jx[0] = s[off];
    Eigen::MatrixXd H = (4.0 / (d * d)) * jx * jx.transpose();
    H(0, 0) -= 2.0 / d;
    for (int i = 1; i < dim; ++i) H(i, i) += 2.0 / d;
    out.soc.push_back(std::move(H));
  }
  for (int k = 0; k < L.n_exp; ++k) {
    const auto h = expcone::hessian(triple(s, L.exp_offset + 3 * k));
    Eigen::Matrix3d H;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) H(i, j) = h[i][j];
    out.exp.push_back(H);
  }
  return out;
}

namespace {

// F'''[v, v] for F = -log psi, from the first three derivatives of psi along v:
// dpsi = psi', d2v = psi'' v, vd2v = v' psi'' v, d3vv = psi'''[v, v].
template <class Vec>
Vec log_third(double psi, const Vec& dpsi, const Vec& d2v, double vd2v, const Vec& d3vv, double dv) {
  return (2.0 * dv / (psi * psi)) * d2v + (vd2v / (psi * psi) - 2.0 * dv * dv / (psi * psi * psi)) * dpsi - d3vv / psi;
}

}  // namespace

Eigen::VectorXd third_order(const ConeLayout& L, const Eigen::VectorXd& s, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(L.dim);
  for (int i = 0; i < L.n_lp; ++i) out[i] = -2.0 * v[i] * v[i] / (s[i] * s[i] * s[i]);
  for (std::size_t k = 0; k < L.soc_dims.size(); ++k) {
    const int off = L.soc_offsets[k], dim = L.soc_dims[k];
    const double psi = soc_det(s, off, dim);
    Eigen::VectorXd jx = -s.segment(off, dim), jv = -v.segment(off, dim);
    jx[0] = s[off];
    jv[0] = v[off];
    const Eigen::VectorXd dpsi = 2.0 * jx, d2v = 2.0 * jv;
    out.segment(off, dim) =
        log_third<Eigen::VectorXd>(psi, dpsi, d2v, v.segment(off, dim).dot(d2v), Eigen::VectorXd::Zero(dim), dpsi.dot(v.segment(off, dim)));
  }
  for (int k = 0; k < L.n_exp; ++k) {
    const int off = L.exp_offset + 3 * k;
    const double b = s[off + 1], c = s[off + 2];
    const double vb = v[off + 1], vc = v[off + 2];
    const double l = std::log(c / b);
    const double psi = b * l - s[off];
    const Eigen::Vector3d dpsi(-1.0, l - 1.0, b / c);
    const Eigen::Vector3d d2v(0.0, -vb / b + vc / c, vb / c - b * vc / (c * c));
    const Eigen::Vector3d d3vv(0.0, vb * vb / (b * b) - vc * vc / (c * c),
                               -2.0 * vb * vc / (c * c) + 2.0 * b * vc * vc / (c * c * c));
    const Eigen::Vector3d vk = v.segment<3>(off);
    Eigen::Vector3d t = log_third<Eigen::Vector3d>(psi, dpsi, d2v, vk.dot(d2v), d3vv, dpsi.dot(vk));
    t[1] -= 2.0 * vb * vb / (b * b * b);
    t[2] -= 2.0 * vc * vc / (c * c * c);
    out.segment<3>(off) = t;
  }
  return out;
}

double proximity(const ConeLayout& L, const Eigen::VectorXd& s, const Eigen::VectorXd& z, double mu) {
  double worst = 0.0;
  for (int i = 0; i < L.n_lp; ++i) worst = std::max(worst, std::abs(s[i] * z[i] - mu));
  for (std::size_t k = 0; k < L.soc_dims.size(); ++k) {
    const int off = L.soc_offsets[k], dim = L.soc_dims[k];
    const double d = soc_det(s, off, dim);
    Eigen::VectorXd psi = z.segment(off, dim);
    psi[0] -= mu * 2.0 * s[off] / d;
    psi.tail(dim - 1) += mu * 2.0 * s.segment(off + 1, dim - 1) / d;
    // psi' (x x' - (d/2) J) psi without forming the matrix.
    const double xp = s.segment(off, dim).dot(psi);
    const double jpp = psi[0] * psi[0] - psi.tail(dim - 1).squaredNorm();
    worst = std::max(worst, std::sqrt(std::max(0.0, xp * xp - 0.5 * d * jpp)));
  }
  for (int k = 0; k < L.n_exp; ++k) {
    const int off = L.exp_offset + 3 * k;
    const auto sk = triple(s, off);
    const auto gk = expcone::gradient(sk);
    Eigen::Vector3d psi(z[off] + mu * gk[0], z[off + 1] + mu * gk[1], z[off + 2] + mu * gk[2]);
    worst = std::max(worst, std::sqrt(std::max(0.0, psi.dot(exp_hinv(sk) * psi))));
  }
  return worst / mu;
}

void central_start(const ConeLayout& L, Eigen::VectorXd& s, Eigen::VectorXd& z) {
  s.setZero(L.dim);
  z.setZero(L.dim);
  s.head(L.n_lp).setOnes();
  z.head(L.n_lp).setOnes();
  for (std::size_t k = 0; k < L.soc_dims.size(); ++k) {
    // Barrier -log(t^2 - |v|^2): s = (sqrt 2, 0) gives -g(s) = s.
    s[L.soc_offsets[k]] = std::sqrt(2.0);
    z[L.soc_offsets[k]] = std::sqrt(2.0);
  }
  const auto& c = expcone::central_point();
  for (int k = 0; k < L.n_exp; ++k) {
    for (int i = 0; i < 3; ++i) {
      s[L.exp_offset + 3 * k + i] = c[i];
      z[L.exp_offset + 3 * k + i] = c[i];
    }
  }
}

}  // namespace detail

}  // namespace rfs::conic
