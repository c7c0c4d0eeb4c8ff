#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "rfs/conic.hpp"
#include "rfs/error.hpp"

using namespace rfs;
using namespace rfs::conic;

namespace {

void expect_certified(const Program& p, const Solution& s) {
  ASSERT_EQ(s.status, Status::Optimal) << s.message;
  const auto c = verify(p, s);
  EXPECT_TRUE(c.passes(1e-7, 1e-7)) << "primal " << c.primal_violation << " dual cone " << c.dual_cone_violation
                                    << " dual res " << c.dual_residual << " gap " << c.relative_gap;
}

}  // namespace

TEST(SoftplusEpigraph, TightAtOptimum) {
  for (double z : {-50.0, -3.0, 0.0, 3.0, 50.0}) {
    Program p;
    const auto d = p.add_var("d");
    add_softplus_epigraph(p, Affine(z), d, "sp");
    p.minimize(d);
    const auto s = solve(p);
    expect_certified(p, s);
    const double ref = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    EXPECT_NEAR(s.value(d), ref, 1e-6) << "z=" << z;
  }
}

TEST(Lp, SmallKnownOptimum) {
  // min -x - 2y  s.t.  x + y <= 4, x <= 3, y <= 2, x, y >= 0  ->  (2, 2), value -6.
  Program p;
  const auto x = p.add_var("x"), y = p.add_var("y");
  p.add_nonneg(Affine(4.0) - x - y);
  p.add_nonneg(Affine(3.0) - x);
  p.add_nonneg(Affine(2.0) - y);
  p.add_nonneg(x);
  p.add_nonneg(y);
  p.minimize(-1.0 * Affine(x) - 2.0 * Affine(y));
  const auto s = solve(p);
  expect_certified(p, s);
  EXPECT_NEAR(s.primal_objective, -6.0, 1e-6);
  EXPECT_NEAR(s.value(x), 2.0, 1e-5);
  EXPECT_NEAR(s.value(y), 2.0, 1e-5);
}

TEST(Lp, EqualityDualHasTheRightSign) {
  // min x + y  s.t.  x + y - 1 = 0, x, y >= 0: equality multiplier is -1 under c'x + y'e(x).
  Program p;
  const auto x = p.add_var("x"), y = p.add_var("y");
  const auto eq = p.add_equality(Affine(x) + Affine(y) - Affine(1.0));
  p.add_nonneg(x);
  p.add_nonneg(y);
  p.minimize(Affine(x) + Affine(y));
  const auto s = solve(p);
  expect_certified(p, s);
  EXPECT_NEAR(s.duals[eq.block][0], -1.0, 1e-6);
}

TEST(Soc, ProjectionOntoBall) {
  // min ||x - a|| over ||x|| <= 1 with a = (3, 4): distance 4.
  Program p;
  const auto x = p.add_vars(2, "x");
  const auto t = p.add_var("t");
  p.add_soc(Affine(1.0), {Affine(x[0]), Affine(x[1])});
  p.add_soc(t, {Affine(x[0]) - Affine(3.0), Affine(x[1]) - Affine(4.0)});
  p.minimize(t);
  const auto s = solve(p);
  expect_certified(p, s);
  EXPECT_NEAR(s.value(t), 4.0, 1e-6);
  EXPECT_NEAR(s.value(x[0]), 0.6, 1e-5);
  EXPECT_NEAR(s.value(x[1]), 0.8, 1e-5);
}

TEST(Soc, NormEpigraphScale) {
  Program p;
  const auto t = p.add_var("t");
  add_norm_epigraph(p, {Affine(3.0), Affine(4.0)}, t, 2.5);
  p.minimize(t);
  const auto s = solve(p);
  expect_certified(p, s);
  EXPECT_NEAR(s.value(t), 12.5, 1e-6);
}

TEST(Exp, LogOfConstant) {
  // max a s.t. (a, 1, 5) in K_exp  ->  a = log 5.
  Program p;
  const auto a = p.add_var("a");
  p.add_exp(a, Affine(1.0), Affine(5.0));
  p.minimize(-1.0 * Affine(a));
  const auto s = solve(p);
  expect_certified(p, s);
  EXPECT_NEAR(s.value(a), std::log(5.0), 1e-6);
}

TEST(Exp, EntropyProblem) {
  // max sum -x_i log x_i with sum x = 1 -> uniform, value log n.
  const int n = 4;
  Program p;
  const auto x = p.add_vars(n, "x");
  const auto t = p.add_vars(n, "t");
  Affine total, obj;
  for (int i = 0; i < n; ++i) {
    // t_i <= -x_i log x_i  <=>  (t_i, x_i, 1) in K_exp.
    p.add_exp(t[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)], Affine(1.0));
    total.add(x[static_cast<std::size_t>(i)], 1.0);
    obj.add(t[static_cast<std::size_t>(i)], -1.0);
  }
  p.add_equality(total - Affine(1.0));
  p.minimize(obj);
  const auto s = solve(p);
  expect_certified(p, s);
  EXPECT_NEAR(-s.primal_objective, std::log(static_cast<double>(n)), 1e-6);
}

TEST(Logistic, MatchesNewtonOnTinyData) {
  // min_w mean softplus(-w x_i) over three points; compare against a 1-D Newton solve.
  const double xs[] = {1.0, -0.5, 2.0};
  Program p;
  const auto w = p.add_var("w");
  Affine obj;
  for (int i = 0; i < 3; ++i) {
    const auto d = p.add_var("d" + std::to_string(i));
    add_softplus_epigraph(p, -xs[i] * Affine(w), d);
    obj.add(d, 1.0 / 3.0);
  }
  // Regularize so the optimum is finite.
  const auto r = p.add_var("r");
  add_norm_epigraph(p, {Affine(w)}, r, 1.0);
  obj.add(r, 0.2);
  p.minimize(obj);
  const auto s = solve(p);
  expect_certified(p, s);

  auto f = [&](double v) {
    double acc = 0.0;
    for (double x : xs) acc += std::log1p(std::exp(-v * x)) / 3.0;
    return acc + 0.2 * std::abs(v);
  };
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    (f(m1) < f(m2) ? hi : lo) = (f(m1) < f(m2) ? m2 : m1);
  }
  EXPECT_NEAR(s.primal_objective, f(0.5 * (lo + hi)), 1e-6);
}

TEST(Status, DetectsInfeasibility) {
  Program p;
  const auto x = p.add_var("x");
  p.add_nonneg(Affine(x) - Affine(2.0));
  p.add_nonneg(Affine(1.0) - Affine(x));
  p.minimize(x);
  EXPECT_EQ(solve(p).status, Status::Infeasible);
}

TEST(Status, DetectsUnboundedness) {
  Program p;
  const auto x = p.add_var("x");
  p.add_nonneg(x);
  p.minimize(-1.0 * Affine(x));
  EXPECT_EQ(solve(p).status, Status::Unbounded);
}

TEST(Verifier, RejectsPerturbedSolution) {
  Program p;
  const auto x = p.add_var("x");
  p.add_nonneg(Affine(x) - Affine(1.0));
  p.minimize(x);
  auto s = solve(p);
  expect_certified(p, s);
  s.x[0] -= 0.01;
  EXPECT_FALSE(verify(p, s).passes(1e-7, 1e-7));
}

TEST(Program, ValidateRejectsBadCoefficients) {
  Program p;
  const auto x = p.add_var("x");
  p.add_nonneg(Affine(x, std::nan("")));
  EXPECT_THROW(p.validate(), ConfigError);
  Program q;
  q.add_var("x");
  q.add_nonneg(Affine(Var{7}));
  EXPECT_THROW(q.validate(), ConfigError);
}

TEST(Dump, RoundTripsExactly) {
  Program p;
  const auto x = p.add_vars(2, "x");
  const auto d = p.add_var("d");
  p.add_equality(Affine(x[0]) + 0.1 * Affine(x[1]) - Affine(1.0 / 3.0), "eq");
  add_softplus_epigraph(p, Affine(x[0]), d, "sp");
  p.add_soc(Affine(2.0), {Affine(x[0]), Affine(x[1])}, "ball");
  p.minimize(Affine(d) + 1e-17 * Affine(x[1]));
  const auto text = dump(p);
  std::istringstream in(text);
  const auto back = parse_dump(in);
  EXPECT_EQ(dump(back), text);
  EXPECT_EQ(back.var_names(), p.var_names());
  const auto a = solve(p), b = solve(back);
  EXPECT_EQ(a.primal_objective, b.primal_objective);
}

TEST(Dump, MalformedInputRejected) {
  std::istringstream in("RFSCONE 1\nVARS 1\n0 x\nOBJ 1 0\n3 1.0\nBLOCKS 0\nEND\n");
  EXPECT_THROW(parse_dump(in), Error);
  std::istringstream bad("NOTCONE\n");
  EXPECT_THROW(parse_dump(bad), Error);
}

TEST(ExpBarrier, CentralPointIsFixed) {
  const auto& c = expcone::central_point();
  ASSERT_TRUE(expcone::primal_interior(c));
  const auto g = expcone::gradient(c);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(g[static_cast<std::size_t>(i)], -c[static_cast<std::size_t>(i)], 1e-10);
}

TEST(ExpBarrier, DerivativesMatchFiniteDifferences) {
  auto f = [](const expcone::Vec3& s) {
    return -std::log(s[1] * std::log(s[2] / s[1]) - s[0]) - std::log(s[1]) - std::log(s[2]);
  };
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  int checked = 0;
  while (checked < 100) {
    expcone::Vec3 s{u(rng) - 3.0, u(rng), u(rng)};
    if (!expcone::primal_interior(s)) continue;
    const auto g = expcone::gradient(s);
    const auto H = expcone::hessian(s);
    const double h = 1e-6;
    for (std::size_t i = 0; i < 3; ++i) {
      auto p = s, m = s;
      p[i] += h;
      m[i] -= h;
      const double fd = (f(p) - f(m)) / (2 * h);
      EXPECT_NEAR(g[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
      const auto gp = expcone::gradient(p), gm = expcone::gradient(m);
      for (std::size_t j = 0; j < 3; ++j) {
        const double hd = (gp[j] - gm[j]) / (2 * h);
        EXPECT_NEAR(H[i][j], hd, 1e-5 * std::max(1.0, std::abs(hd)));
      }
    }
    ++checked;
  }
}

TEST(ExpBarrier, InteriorMembership) {
  EXPECT_TRUE(expcone::primal_interior({0.0, 1.0, 2.0}));
  EXPECT_FALSE(expcone::primal_interior({1.0, 1.0, 2.0}));
  EXPECT_FALSE(expcone::primal_interior({0.0, -1.0, 2.0}));
  EXPECT_TRUE(expcone::dual_interior({-1.0, 0.0, 1.0}));
  EXPECT_FALSE(expcone::dual_interior({1.0, 0.0, 1.0}));
}
