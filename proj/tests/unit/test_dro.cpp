#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rfs/dro.hpp"
#include "rfs/error.hpp"
#include "rfs/nominal.hpp"

using namespace rfs;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wdiff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

HyperParams hp_of(double rho, double eta, double kappa_s, double kappa_y) {
  HyperParams hp;
  hp.rho = rho;
  hp.eta = eta;
  hp.kappa_s = kappa_s;
  hp.kappa_y = kappa_y;
  return hp;
}

oracle::FairParams fair_of(const HyperParams& hp) { return {hp.rho, hp.eta, hp.kappa_s, hp.kappa_y}; }

// Geometric psi grid on [lo, lo * 40] plus the lower bound itself.
std::vector<double> psi_grid(double lo, int points) {
  std::vector<double> g{lo};
  const double base = std::max(lo, 1e-3);
  for (int i = 0; i <= points; ++i) g.push_back(base * std::pow(40.0, static_cast<double>(i) / points));
  return g;
}

double fair_objective(const Eigen::VectorXd& w, const oracle::Instance& d, const HyperParams& hp, int points = 400) {
  const auto p = fair_of(hp);
  const double lo = std::max(oracle::fair_norm_bound(w, 0, d, p), oracle::fair_norm_bound(w, 1, d, p));
  return oracle::fair_on_psi_grid(w, psi_grid(lo, points), d, p);
}

}  // namespace

TEST(EtaMax, SmallerDefaulterCell) {
  MarginalTable m;
  m.p = {0.4, 0.2, 0.3, 0.1};
  EXPECT_DOUBLE_EQ(dro::eta_max(m), 0.1);
}

TEST(Drlr, ZeroRadiusIsLogisticRegression) {
  for (const char* name : {"synthetic_a.csv", "synthetic_b.csv"}) {
    const auto d = oracle::load_instance(name);
    const auto lr = nominal::fit_lr(d.X, d.y);
    const auto fit = dro::fit_drlr(d.X, d.y, hp_of(0.0, 0.0, 1.0, 0.4));
    EXPECT_LT(wdiff(fit.weights.w, lr.w), 1e-4) << name;
  }
}

TEST(Drlr, InfiniteLabelCostIsGroupNormLogistic) {
  const auto d = oracle::load_instance("synthetic_b.csv");
  for (double rho : {0.01, 0.05, 0.2}) {
    const auto fit = dro::fit_drlr(d.X, d.y, hp_of(rho, 0.0, 1.0, kInf));
    EXPECT_LT(wdiff(fit.weights.w, oracle::group_norm_logistic(d.X, d.y, rho)), 1e-4) << rho;
  }
}

TEST(Drlr, MatchesTwoLevelOracle) {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> rho_d(0.005, 0.3), kappa_d(0.1, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = oracle::random_instance(rng, 8, 2);
    const double rho = rho_d(rng), kappa = kappa_d(rng);
    const auto fit = dro::fit_drlr(d.X, d.y, hp_of(rho, 0.0, 1.0, kappa));
    auto f = [&](const Eigen::VectorXd& w) { return oracle::drlr_composite(w, d.X, d.y, rho, kappa); };
    const auto ref = oracle::nelder_mead(f, Eigen::VectorXd::Zero(3));
    const double a = fit.diagnostics.objective, b = f(ref);
    EXPECT_LT(std::abs(a - b) / std::max(1.0, std::abs(b)), 1e-4) << "trial " << trial;
    // The solver's point evaluated by the oracle reproduces its own objective.
    EXPECT_NEAR(f(fit.weights.w), a, 1e-6 * std::max(1.0, std::abs(a))) << "trial " << trial;
  }
}

TEST(Drlr, ObjectiveGrowsWithRadius) {
  const auto d = oracle::load_instance("synthetic_a.csv");
  double prev = -kInf;
  for (double rho : {0.0, 0.01, 0.05, 0.2, 0.5}) {
    const double v = dro::fit_drlr(d.X, d.y, hp_of(rho, 0.0, 1.0, 0.5)).diagnostics.objective;
    EXPECT_GE(v, prev - 1e-8);
    prev = v;
  }
}

TEST(Drlr, RejectsNegativeRadius) {
  const auto d = oracle::load_instance("synthetic_a.csv");
  EXPECT_THROW(dro::fit_drlr(d.X, d.y, hp_of(-0.1, 0.0, 1.0, 1.0)), ConfigError);
}

TEST(Flr, ZeroEtaIsLogisticRegression) {
  const auto d = oracle::load_instance("synthetic_a.csv");
  EXPECT_LT(wdiff(dro::fit_flr(d.X, d.y, d.s, 0.0).weights.w, nominal::fit_lr(d.X, d.y).w), 1e-4);
}

TEST(Flr, MatchesDirectSearch) {
  const auto d = oracle::load_instance("synthetic_c.csv");
  const double eta = 0.5 * dro::eta_max(oracle::cell_marginals(d.y, d.s));
  const auto hp = hp_of(0.0, eta, 1.0, 1.0);
  const auto fit = dro::fit_flr(d.X, d.y, d.s, eta);
  auto f = [&](const Eigen::VectorXd& w) { return fair_objective(w, d, hp); };
  const auto ref = oracle::nelder_mead(f, Eigen::VectorXd::Zero(3));
  EXPECT_NEAR(fit.diagnostics.objective, f(ref), 1e-6);
  EXPECT_NEAR(f(fit.weights.w), fit.diagnostics.objective, 1e-6);
}

TEST(Drflr, ZeroRadiusIsFlr) {
  const auto d = oracle::load_instance("synthetic_b.csv");
  const double eta = 0.5 * dro::eta_max(oracle::cell_marginals(d.y, d.s));
  const auto a = dro::fit_drflr(d.X, d.y, d.s, hp_of(0.0, eta, 0.3, 0.3));
  const auto b = dro::fit_flr(d.X, d.y, d.s, eta);
  EXPECT_LT(wdiff(a.weights.w, b.weights.w), 1e-4);
}

TEST(Drflr, ZeroEtaWithRigidLabelsIsDrlr) {
  const auto d = oracle::load_instance("synthetic_a.csv");
  for (double rho : {0.01, 0.1}) {
    const auto a = dro::fit_drflr(d.X, d.y, d.s, hp_of(rho, 0.0, 0.5, kInf));
    const auto b = dro::fit_drlr(d.X, d.y, hp_of(rho, 0.0, 1.0, kInf));
    EXPECT_LT(wdiff(a.weights.w, b.weights.w), 1e-4) << rho;
  }
}

TEST(Drflr, ZeroEtaNeverExceedsDrlr) {
  // Preserving the cell marginals shrinks the ambiguity set.
  for (const char* name : {"synthetic_a.csv", "synthetic_c.csv"}) {
    const auto d = oracle::load_instance(name);
    for (double kappa : {0.2, 0.8}) {
      const double a = dro::fit_drflr(d.X, d.y, d.s, hp_of(0.05, 0.0, kappa, kappa)).diagnostics.objective;
      const double b = dro::fit_drlr(d.X, d.y, hp_of(0.05, 0.0, 1.0, kappa)).diagnostics.objective;
      EXPECT_LE(a, b + 1e-7) << name << " kappa " << kappa;
    }
  }
}

TEST(Drflr, OptimumBelowGridDualAndMatchesItsMinimum) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  for (int trial = 0; trial < 4; ++trial) {
    const auto d = oracle::random_instance(rng, 10, 2);
    const double eta = 0.6 * dro::eta_max(oracle::cell_marginals(d.y, d.s));
    const auto hp = hp_of(0.05 + 0.05 * trial, eta, 0.4, 0.6);
    const auto fit = dro::fit_drflr(d.X, d.y, d.s, hp);
    const double opt = fit.diagnostics.objective;
    // Upper bound at arbitrary weights.
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd w(3);
      w << unif(rng), unif(rng), unif(rng);
      EXPECT_GE(fair_objective(w, d, hp, 200), opt - 1e-7) << "trial " << trial;
    }
    // At the solver's weights the grid value sits just above the optimum.
    const double at = fair_objective(fit.weights.w, d, hp, 2000);
    EXPECT_GE(at, opt - 1e-7) << "trial " << trial;
    EXPECT_LE(at - opt, 2e-3 * std::max(1.0, opt)) << "trial " << trial;
  }
}

TEST(Drflr, EtaAboveBoundRejected) {
  const auto d = oracle::load_instance("synthetic_a.csv");
  const double bound = dro::eta_max(oracle::cell_marginals(d.y, d.s));
  EXPECT_THROW(dro::fit_drflr(d.X, d.y, d.s, hp_of(0.1, bound * 1.01, 1.0, 1.0)), ValidationError);
  EXPECT_THROW(dro::fit_drflr(d.X, d.y, d.s, hp_of(0.1, -0.01, 1.0, 1.0)), ValidationError);
  EXPECT_NO_THROW(dro::fit_drflr(d.X, d.y, d.s, hp_of(0.1, bound, 1.0, 1.0)));
}

TEST(Drflr, CertificatesPass) {
  const auto d = oracle::load_instance("synthetic_b.csv");
  const auto fit = dro::fit_drflr(d.X, d.y, d.s, hp_of(0.05, 0.02, 0.4, 0.4));
  EXPECT_EQ(fit.diagnostics.status, conic::Status::Optimal);
  EXPECT_TRUE(fit.diagnostics.certificate.passes(1e-7, 1e-7));
}

TEST(Drflr, ProgramDumpRoundTrips) {
  const auto d = oracle::load_instance("synthetic_c.csv");
  const auto prog = dro::build_drflr(d.X, d.y, d.s, hp_of(0.05, 0.02, 0.4, 0.4));
  const auto text = conic::dump(prog.program);
  std::istringstream in(text);
  EXPECT_EQ(conic::dump(conic::parse_dump(in)), text);
}

TEST(Drlr, LargeRadiusGivesTheFeatureFreeModel) {
  const auto d = oracle::load_instance("synthetic_b.csv");
  const auto fit = dro::fit_drlr(d.X, d.y, hp_of(1.0, 0.0, 1.0, 0.1));
  EXPECT_TRUE(fit.diagnostics.zero_features);
  EXPECT_EQ(fit.weights.w.head(fit.weights.w.size() - 1).lpNorm<Eigen::Infinity>(), 0.0);
  // The flip rows make every constant score cost log 2.
  EXPECT_NEAR(fit.diagnostics.objective, std::log(2.0), 1e-7);
}
