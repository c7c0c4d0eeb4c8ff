// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance [--threads N] [--only 1,3,...]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "../unit/oracles.hpp"
#include "rfs/conic.hpp"
#include "rfs/dataset.hpp"
#include "rfs/dro.hpp"
#include "rfs/error.hpp"
#include "rfs/eval.hpp"
#include "rfs/metrics.hpp"
#include "rfs/nominal.hpp"

using namespace rfs;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_threads = 1;

HyperParams hp_of(double rho, double eta, double kappa_s, double kappa_y) {
  HyperParams hp;
  hp.rho = rho;
  hp.eta = eta;
  hp.kappa_s = kappa_s;
  hp.kappa_y = kappa_y;
  return hp;
}

double wdiff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

std::shared_ptr<const data::RawTable> gc() {
  static const auto raw = std::make_shared<const data::RawTable>(data::load_german_credit());
  return raw;
}

eval::ExperimentSpec gc_spec(ModelFamily family) {
  eval::ExperimentSpec spec;
  spec.dataset_id = "GC";
  spec.raw = gc();
  spec.dataset_hash = eval::fingerprint(*spec.raw);
  spec.family = family;
  spec.k = 5;
  spec.seed = 0;
  spec.threads = g_threads;
  return spec;
}

double mean_of(const eval::EvalReport& r, const std::string& metric) { return r.aggregate.at(metric).mean; }

// ---------------------------------------------------------------------------
// 1 and 2: GC grid search per family

std::map<ModelFamily, eval::EvalReport>& table1_reports() {
  static std::map<ModelFamily, eval::EvalReport> reports;
  if (!reports.empty()) return reports;
  const auto folds = eval::prepare_folds(gc_spec(ModelFamily::LR));
  for (auto family : {ModelFamily::LR, ModelFamily::LRL2, ModelFamily::DRLR, ModelFamily::DRFLR}) {
    auto spec = gc_spec(family);
    spec.grid = eval::default_grid(family);
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = eval::grid_search(spec, folds);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& best = g.best_report();
    // Under the fraction rule eta is set per training fold.
    const std::string eta = family == ModelFamily::DRFLR && spec.eta_rule.kind == eval::EtaRule::Kind::FixedFraction
                                ? fmt::format("{}*eta_max", spec.eta_rule.fraction)
                                : fmt::format("{:.4g}", best.hp.eta);
    std::printf("  %-6s grid %3zu points, %6.1fs: ROC %.4f±%.4f LEO %.4f SP %.4f (rho %g eta %s kappa_s %g kappa_y %g lambda %g)\n",
                std::string(to_string(family)).c_str(), g.reports.size(), secs, mean_of(best, "roc"),
                best.aggregate.at("roc").std, mean_of(best, "leo"), mean_of(best, "sp"), best.hp.rho, eta.c_str(),
                best.hp.kappa_s, best.hp.kappa_y, best.hp.lambda);
    std::fflush(stdout);
    reports.emplace(family, best);
  }
  return reports;
}

Outcome c1() {
  const std::map<ModelFamily, double> target{
      {ModelFamily::LR, 0.763}, {ModelFamily::LRL2, 0.765}, {ModelFamily::DRLR, 0.759}, {ModelFamily::DRFLR, 0.759}};
  Outcome o{true, {}};
  for (const auto& [family, ref] : target) {
    const double roc = mean_of(table1_reports().at(family), "roc");
    const bool ok = std::abs(roc - ref) <= 0.03;
    o.pass = o.pass && ok;
    o.detail += fmt::format("{} {:.4f} (ref {:.3f}){} ", to_string(family), roc, ref, ok ? "" : " OUT");
  }
  return o;
}

Outcome c2() {
  const double lr = mean_of(table1_reports().at(ModelFamily::LR), "leo");
  const double drlr = mean_of(table1_reports().at(ModelFamily::DRLR), "leo");
  const double drflr = mean_of(table1_reports().at(ModelFamily::DRFLR), "leo");
  return {drflr < drlr && drlr < lr, fmt::format("LEO DRFLR {:.4f}, DRLR {:.4f}, LR {:.4f}", drflr, drlr, lr)};
}

// ---------------------------------------------------------------------------
// 3: reductions

Eigen::VectorXd flr_oracle(const oracle::Instance& d, double eta, const Eigen::VectorXd& start) {
  const oracle::FairParams p{0.0, eta, 1.0, 1.0};
  return oracle::nelder_mead([&](const Eigen::VectorXd& w) { return oracle::fair_on_psi_grid(w, {}, d, p); }, start,
                             0.5, 1e-13, 12);
}

Outcome c3() {
  double worst = 0.0;
  std::string detail;
  for (const char* name : {"synthetic_a.csv", "synthetic_b.csv", "synthetic_c.csv"}) {
    const auto d = oracle::load_instance(name);
    const double eta = 0.5 * dro::eta_max(oracle::cell_marginals(d.y, d.s));
    const auto lr = nominal::fit_lr(d.X, d.y).w;
    std::vector<std::pair<std::string, double>> gaps;
    gaps.emplace_back("DRLR(rho=0)=LR", wdiff(dro::fit_drlr(d.X, d.y, hp_of(0.0, 0.0, 1.0, 0.4)).weights.w, lr));
    gaps.emplace_back("DRFLR(eta=0)=DRLR",
                      wdiff(dro::fit_drflr(d.X, d.y, d.s, hp_of(0.05, 0.0, 0.5, kInf)).weights.w,
                            dro::fit_drlr(d.X, d.y, hp_of(0.05, 0.0, 1.0, kInf)).weights.w));
    gaps.emplace_back("DRFLR(rho=0)=FLR", wdiff(dro::fit_drflr(d.X, d.y, d.s, hp_of(0.0, eta, 0.4, 0.4)).weights.w,
                                                flr_oracle(d, eta, lr)));
    gaps.emplace_back("FLR(eta=0)=LR", wdiff(dro::fit_flr(d.X, d.y, d.s, 0.0).weights.w, lr));
    gaps.emplace_back("DRLR(kappa_y=inf)=group-norm LR",
                      wdiff(dro::fit_drlr(d.X, d.y, hp_of(0.05, 0.0, 1.0, kInf)).weights.w,
                            oracle::group_norm_logistic(d.X, d.y, 0.05)));
    for (const auto& [label, gap] : gaps) {
      worst = std::max(worst, gap);
      if (gap > 1e-4) detail += fmt::format("{} on {}: {:.2e}; ", label, name, gap);
    }
  }
  return {worst <= 1e-4, detail + fmt::format("15 identities, worst weight gap {:.2e}", worst)};
}

// ---------------------------------------------------------------------------
// 4: oracle equivalence

struct GridScan {
  double min = 0.0;
  Eigen::VectorXd argmin;
  double lowest_gap = 0.0;  // min over the grid of value - bound
  double neighbor_spread = 0.0;
};

// Evaluates f on a (2m+1)^3 lattice centred at c with spacing h.
GridScan scan_lattice(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& c, double h,
                      int m, double bound) {
  const int side = 2 * m + 1;
  std::vector<double> vals(static_cast<std::size_t>(side * side * side));
  auto at = [&](int i, int j, int k) -> double& { return vals[static_cast<std::size_t>((i * side + j) * side + k)]; };
  GridScan g;
  g.min = kInf;
  g.lowest_gap = kInf;
  int bi = 0, bj = 0, bk = 0;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      for (int k = 0; k < side; ++k) {
        Eigen::VectorXd w = c;
        w(0) += h * (i - m);
        w(1) += h * (j - m);
        w(2) += h * (k - m);
        const double v = f(w);
        at(i, j, k) = v;
        g.lowest_gap = std::min(g.lowest_gap, v - bound);
        if (v < g.min) {
          g.min = v;
          g.argmin = w;
          bi = i, bj = j, bk = k;
        }
      }
  for (int axis = 0; axis < 3; ++axis)
    for (int step : {-1, 1}) {
      int i = bi + (axis == 0 ? step : 0), j = bj + (axis == 1 ? step : 0), k = bk + (axis == 2 ? step : 0);
      if (i < 0 || j < 0 || k < 0 || i >= side || j >= side || k >= side) continue;
      g.neighbor_spread = std::max(g.neighbor_spread, at(i, j, k) - g.min);
    }
  return g;
}

Outcome c4() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> rho_d(0.005, 0.3), kappa_d(0.1, 2.0), unif(-1.5, 1.5);
  double worst_rel = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const auto d = oracle::random_instance(rng, 8, 2);
    const double rho = rho_d(rng), kappa = kappa_d(rng);
    const auto fit = dro::fit_drlr(d.X, d.y, hp_of(rho, 0.0, 1.0, kappa));
    auto f = [&](const Eigen::VectorXd& w) { return oracle::drlr_composite(w, d.X, d.y, rho, kappa); };
    const double ref = f(oracle::nelder_mead(f, Eigen::VectorXd::Zero(3)));
    worst_rel = std::max(worst_rel, std::abs(fit.diagnostics.objective - ref) / std::max(1.0, std::abs(ref)));
  }

  // Robust fair program: the dual is evaluated exactly at each lattice point
  // (minimum over psi per row, maximum over rows). A coarse lattice on
  // [-4, 4]^3 is refined three times around its minimiser.
  int below_violations = 0;
  double worst_match = 0.0, worst_allowed = 0.0, lowest_gap = kInf;
  bool match_ok = true;
  for (int trial = 0; trial < 6; ++trial) {
    const auto d = oracle::random_instance(rng, 8, 2);
    const double eta = 0.6 * dro::eta_max(oracle::cell_marginals(d.y, d.s));
    const auto hp = hp_of(rho_d(rng), eta, kappa_d(rng), kappa_d(rng));
    const oracle::FairParams p{hp.rho, hp.eta, hp.kappa_s, hp.kappa_y};
    const double opt = dro::fit_drflr(d.X, d.y, d.s, hp).diagnostics.objective;
    auto dual = [&](const Eigen::VectorXd& w) { return oracle::fair_dual(w, d, p); };
    auto g = scan_lattice(dual, Eigen::VectorXd::Zero(3), 1.0, 4, opt);
    double gap = g.lowest_gap;
    for (double h : {0.2, 0.04, 0.008}) {
      g = scan_lattice(dual, g.argmin, h, 5, opt);
      gap = std::min(gap, g.lowest_gap);
    }
    lowest_gap = std::min(lowest_gap, gap);
    if (gap < -1e-7) ++below_violations;
    worst_match = std::max(worst_match, g.min - opt);
    worst_allowed = std::max(worst_allowed, g.neighbor_spread);
    match_ok = match_ok && g.min - opt <= g.neighbor_spread + 1e-7;
  }
  const bool pass = worst_rel <= 1e-4 && below_violations == 0 && match_ok;
  return {pass, fmt::format("DRLR worst relative gap {:.2e} over 25 instances; DRFLR grid below optimum {} times, "
                            "lowest grid margin {:.2e}, grid minimum above optimum by {:.2e} (resolution {:.2e})",
                            worst_rel, below_violations, lowest_gap, worst_match, worst_allowed)};
}

// ---------------------------------------------------------------------------
// 5: metric oracles

Outcome c5() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(4, 30);
  std::uniform_real_distribution<double> unif(0.001, 0.999);
  std::bernoulli_distribution coin;
  int roc_bad = 0, youden_bad = 0, sp_bad = 0, leo_bad = 0;
  double sp_err = 0.0, leo_err = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    const bool coarse = coin(rng);
    ScoreVector score(n);
    Labels y(n);
    GroupVector s(n);
    for (int i = 0; i < n; ++i) {
      score[i] = coarse ? std::round(unif(rng) * 8.0) / 8.0 * 0.98 + 0.01 : unif(rng);
      y[i] = i < 4 ? i % 2 : coin(rng);
      s[i] = i < 4 ? i / 2 : coin(rng);
    }
    if (metrics::roc_auc(score, y) != oracle::roc_pairs(score, y)) ++roc_bad;
    const auto ref = oracle::youden_sweep(score, y);
    const auto got = metrics::youden(score, y);
    bool same = got.j == ref.best_j;
    for (int i = 0; i < n; ++i) same = same && ((score[i] >= got.threshold) == (ref.predicted[static_cast<std::size_t>(i)] == 1));
    if (!same) ++youden_bad;
    const double t = unif(rng);
    const double e1 = std::abs(metrics::sp(score, y, s, t) - oracle::sp_direct(score, y, s, t));
    const double e2 = std::abs(metrics::leo(score, y, s) - oracle::leo_direct(score, y, s));
    sp_err = std::max(sp_err, e1);
    leo_err = std::max(leo_err, e2);
    if (e1 > 1e-12) ++sp_bad;
    if (e2 > 1e-12) ++leo_bad;
  }
  return {roc_bad + youden_bad + sp_bad + leo_bad == 0,
          fmt::format("1000 instances: roc mismatches {}, youden mismatches {}, max |sp err| {:.1e}, max |leo err| {:.1e}",
                      roc_bad, youden_bad, sp_err, leo_err)};
}

// ---------------------------------------------------------------------------
// 6: gradients

Outcome c6() {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.4);
  const int n = 50, k = 5;
  Eigen::MatrixXd X(n, k + 1);
  Labels y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) X(i, j) = normal(rng);
    X(i, k) = 1.0;
    y[i] = i < 2 ? i : coin(rng);
  }
  auto rel = [](const Eigen::VectorXd& g, const Eigen::VectorXd& fd) {
    return (g - fd).lpNorm<Eigen::Infinity>() / std::max(fd.lpNorm<Eigen::Infinity>(), 1e-8);
  };
  double worst[3] = {0.0, 0.0, 0.0};
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd w(k + 1);
    for (Eigen::Index j = 0; j <= k; ++j) {
      do w[j] = normal(rng);
      while (std::abs(w[j]) < 0.01);
    }
    Eigen::VectorXd g;
    nominal::logloss(w, X, y, &g);
    worst[0] = std::max(worst[0], rel(g, oracle::central_gradient([&](const Eigen::VectorXd& v) { return oracle::mean_logloss(v, X, y); }, w)));
    nominal::l2_objective(w, X, y, 0.3, &g);
    worst[1] = std::max(worst[1], rel(g, oracle::central_gradient([&](const Eigen::VectorXd& v) {
                                        return oracle::mean_logloss(v, X, y) + 0.3 * v.head(k).squaredNorm();
                                      }, w)));
    data::l1_logistic_objective(w, X, y, 0.05, &g);
    worst[2] = std::max(worst[2], rel(g, oracle::central_gradient([&](const Eigen::VectorXd& v) {
                                        return oracle::mean_logloss(v, X, y) + 0.05 * v.head(k).lpNorm<1>();
                                      }, w)));
  }
  return {worst[0] < 1e-6 && worst[1] < 1e-6 && worst[2] < 1e-6,
          fmt::format("100 points each, worst relative error: logloss {:.1e}, L2 {:.1e}, lasso {:.1e}", worst[0],
                      worst[1], worst[2])};
}

// ---------------------------------------------------------------------------
// 7: certificates

Outcome c7() {
  std::vector<conic::Program> programs;
  for (const char* name : {"synthetic_a.csv", "synthetic_b.csv", "synthetic_c.csv"}) {
    const auto d = oracle::load_instance(name);
    const double bound = dro::eta_max(oracle::cell_marginals(d.y, d.s));
    for (double rho : {0.0, 0.01, 0.1, 0.5}) {
      for (double kappa : {0.0, 0.2, 1.0, kInf}) {
        programs.push_back(dro::build_drlr(d.X, d.y, rho, kappa).program);
        programs.push_back(dro::build_drflr(d.X, d.y, d.s, hp_of(rho, 0.5 * bound, 0.4, kappa)).program);
      }
      programs.push_back(dro::build_drflr(d.X, d.y, d.s, hp_of(rho, bound, 0.3, 0.3)).program);
    }
  }
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = oracle::random_instance(rng, 8, 2);
    programs.push_back(dro::build_drlr(d.X, d.y, 0.05, 0.5).program);
    programs.push_back(dro::build_drflr(d.X, d.y, d.s, hp_of(0.05, 0.0, 0.5, 0.5)).program);
  }
  int optimal = 0, failed_cert = 0, other = 0;
  double worst_feas = 0.0, worst_gap = 0.0;
  for (const auto& p : programs) {
    const auto sol = conic::solve(p);
    if (sol.status != conic::Status::Optimal) {
      ++other;
      continue;
    }
    ++optimal;
    const auto c = conic::verify(p, sol);
    worst_feas = std::max({worst_feas, c.primal_violation, c.dual_cone_violation, c.dual_residual});
    worst_gap = std::max(worst_gap, c.relative_gap);
    if (!c.passes(1e-7, 1e-7)) ++failed_cert;
  }
  double worst_sp = 0.0;
  for (double z : {-50.0, -3.0, 0.0, 3.0, 50.0}) {
    conic::Program p;
    const auto d = p.add_var("d");
    conic::add_softplus_epigraph(p, conic::Affine(z), d);
    p.minimize(d);
    const auto sol = conic::solve(p);
    if (sol.status != conic::Status::Optimal) {
      worst_sp = kInf;
      continue;
    }
    ++optimal;
    if (!conic::verify(p, sol).passes(1e-7, 1e-7)) ++failed_cert;
    worst_sp = std::max(worst_sp, std::abs(sol.value(d) - oracle::softplus(z)));
  }
  return {failed_cert == 0 && worst_sp <= 1e-6,
          fmt::format("{} optimal solves ({} not optimal), {} failed the verifier, worst feasibility {:.1e}, "
                      "worst gap {:.1e}; softplus epigraph max error {:.1e}",
                      optimal, other, failed_cert, worst_feas, worst_gap, worst_sp)};
}

// ---------------------------------------------------------------------------
// 8: rho collapse

Outcome c8() {
  auto spec = gc_spec(ModelFamily::DRFLR);
  spec.eta_rule.kind = eval::EtaRule::Kind::Grid;
  const auto table = eval::sweep(spec, hp_of(0.01, 0.05, 0.2, 0.2), eval::SweepKind::Rho, {0.01, 0.05, 0.1, 0.2, 0.3, 0.5});
  std::string curve;
  for (const auto& p : table.points) curve += fmt::format("{}:{:.4f} ", p.values[0], mean_of(p.report, "roc"));
  const double lo = mean_of(table.points.front().report, "roc");
  const double hi = mean_of(table.points.back().report, "roc");
  return {hi < lo - 0.05, "mean ROC by rho " + curve};
}

// ---------------------------------------------------------------------------
// 9: marginal shift

Outcome c9() {
  auto spec = gc_spec(ModelFamily::LR);
  const eval::EtaRule rule{eval::EtaRule::Kind::FixedFraction, 1.0 / 1.5};
  const std::vector<eval::ShiftModel> models{
      {"LR", ModelFamily::LR, {}, std::nullopt},
      {"DRLR", ModelFamily::DRLR, hp_of(0.01, 0.0, 0.4, 0.4), std::nullopt},
      {"DRFLR", ModelFamily::DRFLR, hp_of(0.01, 0.0, 0.4, 0.4), rule},
  };
  std::vector<double> q;
  for (int i = 0; i <= 9; ++i) q.push_back(0.1 * i);
  const auto curve = eval::marginal_shift_experiment(spec, models, q);

  // Pooled fold std of LEO over the robust models and every q.
  double sq = 0.0;
  int count = 0;
  for (std::size_t qi = 0; qi < q.size(); ++qi) {
    for (std::size_t mi = 1; mi < models.size(); ++mi) {
      sq += std::pow(curve.reports[qi][mi].aggregate.at("leo").std, 2);
      ++count;
    }
  }
  const double band = std::sqrt(sq / count);
  std::string detail = fmt::format("band {:.4f}; ", band);
  bool pass = true;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const double base = mean_of(curve.reports[0][mi], "leo");
    double dev = 0.0;
    detail += models[mi].name + " LEO";
    for (std::size_t qi = 0; qi < q.size(); ++qi) {
      const double v = mean_of(curve.reports[qi][mi], "leo");
      dev = std::max(dev, std::abs(v - base));
      detail += fmt::format(" {:.3f}", v);
    }
    if (mi == 0) {
      const double at8 = mean_of(curve.reports[8][0], "leo");
      pass = pass && at8 > base - band;
      detail += fmt::format(" (q=0.8 minus q=0: {:+.4f}); ", at8 - base);
    } else {
      pass = pass && dev <= band;
      detail += fmt::format(" (max deviation {:.4f}); ", dev);
    }
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------
// 10: determinism of the command line outputs

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c10() {
  const auto root = fs::temp_directory_path() / "rfs_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const json ds = {{"id", "GC"}, {"preprocess", {{"subsample_n", 400}}}};
  const json drflr = {{"name", "DRFLR"},
                      {"family", "DRFLR"},
                      {"eta_fraction", 0.5},
                      {"hyperparams", {{"rho", 0.01}, {"kappa_s", 0.4}, {"kappa_y", 0.4}}}};
  const json drlr = {{"name", "DRLR"}, {"family", "DRLR"}, {"hyperparams", {{"rho", 0.01}, {"kappa_y", 0.4}}}};
  const json lr = {{"name", "LR"}, {"family", "LR"}, {"hyperparams", json::object()}};
  const std::vector<std::pair<std::string, json>> runs{
      {"prep", {{"dataset", ds}}},
      {"cv", {{"dataset", ds}, {"models", {lr, drlr, drflr}}}},
      {"train", {{"dataset", ds}, {"model", drflr}}},
      {"sweep", {{"dataset", ds}, {"model", drlr},
                 {"experiment", {{"kind", "sweep"}, {"params", {{"parameter", "rho"}, {"values", {0.0, 0.05}}}}}}}},
      {"shift", {{"dataset", ds}, {"models", {lr, drflr}}, {"experiment", {{"kind", "shift"}, {"params", {{"q", {0.0, 0.5}}}}}}}},
      {"table1", {{"dataset", ds}, {"models", {lr, drlr, drflr}}, {"experiment", {{"kind", "table1"}}}}},
  };
  int compared = 0, differing = 0;
  std::string detail;
  for (const auto& [command, cfg] : runs) {
    const auto cfg_path = root / (command + ".json");
    std::ofstream(cfg_path) << cfg.dump(2);
    std::vector<fs::path> outs;
    for (int rep = 0; rep < 2; ++rep) {
      const auto out = root / fmt::format("{}_{}", command, rep);
      const std::string cmd = fmt::format("{} {} --config {} --output {} --threads 1 > {} 2>&1", RFS_CLI_PATH, command,
                                          cfg_path.string(), out.string(), (root / "log.txt").string());
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, command + " exited with an error"};
      outs.push_back(out);
    }
    for (const auto& entry : fs::directory_iterator(outs[0])) {
      const auto ext = entry.path().extension();
      if (ext != ".csv" && ext != ".json") continue;
      if (entry.path().filename() == "manifest.json") continue;
      ++compared;
      if (slurp(entry.path()) != slurp(outs[1] / entry.path().filename())) {
        ++differing;
        detail += entry.path().filename().string() + " ";
      }
    }
  }
  fs::remove_all(root);
  return {compared > 0 && differing == 0,
          fmt::format("{} output files compared across 6 commands, {} differ {}", compared, differing, detail)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--threads" && i + 1 < argc) {
      g_threads = std::max(1, std::atoi(argv[++i]));
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else {
      std::fprintf(stderr, "usage: acceptance [--threads N] [--only 1,2,...]\n");
      return 2;
    }
  }
  spdlog::set_level(spdlog::level::warn);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"GC cross-validated ROC near the published values", c1},
      {"GC mean LEO ordering DRFLR < DRLR < LR", c2},
      {"reduction identities on synthetic instances", c3},
      {"conic optima agree with independent oracles", c4},
      {"metric oracles", c5},
      {"gradient checks", c6},
      {"conic certificates and softplus epigraph", c7},
      {"GC ROC collapses as rho grows", c8},
      {"GC marginal shift stability", c9},
      {"byte-identical reruns", c10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("[%s] C%d %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
