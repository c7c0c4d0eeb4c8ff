#include <bit>
#include <cmath>

#include <spdlog/spdlog.h>

#include "rfs/error.hpp"
#include "rfs/eval.hpp"
#include "rfs/random.hpp"

namespace rfs::eval {

namespace {

EvalReport make_report(const ExperimentSpec& spec, const HyperParams& hp, std::vector<FoldResult> folds) {
  EvalReport rep;
  rep.dataset_id = spec.dataset_id;
  rep.family = spec.family;
  rep.hp = hp;
  rep.folds = std::move(folds);
  rep.seed = spec.seed;
  rep.config_hash = spec.config_hash();
  rep.dataset_hash = spec.dataset_hash;
  rep.summarize();
  return rep;
}

}  // namespace

std::string_view to_string(SweepKind k) {
  switch (k) {
    case SweepKind::Rho: return "rho";
    case SweepKind::Eta: return "eta";
    case SweepKind::EtaFraction: return "eta_fraction";
    case SweepKind::Kappa: return "kappa";
  }
  return "?";
}

SweepKind parse_sweep_kind(std::string_view name) {
  if (name == "rho") return SweepKind::Rho;
  if (name == "eta") return SweepKind::Eta;
  if (name == "eta_fraction") return SweepKind::EtaFraction;
  if (name == "kappa") return SweepKind::Kappa;
  throw ConfigError("unknown sweep parameter '" + std::string(name) + "'");
}

SweepTable sweep(const ExperimentSpec& spec, const HyperParams& base, SweepKind kind, const std::vector<double>& grid,
                 const std::vector<double>& kappa_s_grid) {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  if (kind == SweepKind::Kappa && kappa_s_grid.empty()) throw ConfigError("kappa sweep needs a kappa_s grid");

  SweepTable table;
  table.kind = kind;
  std::vector<ExperimentSpec> specs;
  std::vector<HyperParams> hps;
  auto add = [&](ExperimentSpec s, HyperParams hp, std::vector<double> values) {
    s.grid = HyperGrid::single(hp);
    s.validate();
    specs.push_back(std::move(s));
    hps.push_back(hp);
    table.points.push_back({std::move(values), {}});
  };

  for (double v : grid) {
    ExperimentSpec s = spec;
    HyperParams hp = base;
    switch (kind) {
      case SweepKind::Rho:
        hp.rho = v;
        add(s, hp, {v});
        break;
      case SweepKind::Eta:
        s.eta_rule.kind = EtaRule::Kind::Grid;
        hp.eta = v;
        add(s, hp, {v});
        break;
      case SweepKind::EtaFraction:
        s.eta_rule = {EtaRule::Kind::FixedFraction, v};
        add(s, hp, {v});
        break;
      case SweepKind::Kappa:
        for (double ks : kappa_s_grid) {
          hp.kappa_y = v;
          hp.kappa_s = ks;
          add(s, hp, {v, ks});
        }
        break;
    }
  }
  switch (kind) {
    case SweepKind::Rho: table.columns = {"rho"}; break;
    case SweepKind::Eta: table.columns = {"eta"}; break;
    case SweepKind::EtaFraction: table.columns = {"eta_fraction"}; break;
    case SweepKind::Kappa: table.columns = {"kappa_y", "kappa_s"}; break;
  }

  const auto folds = prepare_folds(spec);
  const std::size_t nf = folds.size();
  std::vector<FoldResult> results(specs.size() * nf);
  parallel_for(results.size(), spec.threads,
               [&](std::size_t i) { results[i] = evaluate_fold(specs[i / nf], folds[i % nf], hps[i / nf]); });
  for (std::size_t p = 0; p < specs.size(); ++p) {
    std::vector<FoldResult> part(results.begin() + static_cast<std::ptrdiff_t>(p * nf),
                                 results.begin() + static_cast<std::ptrdiff_t>((p + 1) * nf));
    table.points[p].report = make_report(specs[p], hps[p], std::move(part));
  }
  return table;
}

ShiftCurve marginal_shift_experiment(const ExperimentSpec& spec, const std::vector<ShiftModel>& models,
                                     const std::vector<double>& q_grid) {
  spec.validate();
  if (models.empty()) throw ConfigError("shift experiment needs at least one model");
  if (q_grid.empty()) throw ConfigError("shift experiment needs a q grid");
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    if (!(q_grid[i] >= 0.0 && q_grid[i] < 1.0)) throw ConfigError("q values must lie in [0, 1)");
    if (i > 0 && !(q_grid[i] > q_grid[i - 1])) throw ConfigError("q values must increase strictly");
  }

  std::vector<ExperimentSpec> specs;
  for (const auto& m : models) {
    ExperimentSpec s = spec;
    s.family = m.family;
    s.grid = HyperGrid::single(m.hp);
    if (m.eta_rule) s.eta_rule = *m.eta_rule;
    specs.push_back(std::move(s));
  }

  const auto folds = make_folds(spec);
  const GroupVector groups = group_labels(*spec.raw, spec.preprocess.age_threshold);
  const std::size_t nf = folds.size();
  const std::size_t nq = q_grid.size();
  const std::size_t nm = models.size();
  std::vector<FoldResult> results(nq * nm * nf);

  // One work item per (q, fold): drop rows from the training part, refit the
  // preprocessing, then fit every model on the same prepared fold.
  parallel_for(nq * nf, spec.threads, [&](std::size_t item) {
    const std::size_t qi = item / nf;
    const std::size_t f = item % nf;
    const auto& train = folds[f].train;
    Labels y(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) y[static_cast<Eigen::Index>(i)] = spec.raw->target[train[i]];
    GroupVector s(y.size());
    for (std::size_t i = 0; i < train.size(); ++i) s[static_cast<Eigen::Index>(i)] = groups[static_cast<Eigen::Index>(train[i])];
    const std::uint64_t seed = derive_seed(spec.seed, f, std::bit_cast<std::uint64_t>(q_grid[qi]));
    const auto kept = data::drop_subgroup_fraction_indices(y, s, q_grid[qi], seed);
    std::vector<std::size_t> rows;
    rows.reserve(kept.size());
    for (std::size_t i : kept) rows.push_back(train[i]);

    const PreparedFold prepared = prepare_fold(spec, static_cast<int>(f), rows, folds[f].test);
    spdlog::debug("shift q={} fold {}: {} of {} training rows kept", q_grid[qi], f, rows.size(), train.size());
    for (std::size_t mi = 0; mi < nm; ++mi) {
      results[(qi * nm + mi) * nf + f] = evaluate_fold(specs[mi], prepared, models[mi].hp);
    }
  });

  ShiftCurve curve;
  curve.q = q_grid;
  curve.models = models;
  curve.reports.resize(nq);
  for (std::size_t qi = 0; qi < nq; ++qi) {
    for (std::size_t mi = 0; mi < nm; ++mi) {
      const std::size_t at = (qi * nm + mi) * nf;
      std::vector<FoldResult> part(results.begin() + static_cast<std::ptrdiff_t>(at),
                                   results.begin() + static_cast<std::ptrdiff_t>(at + nf));
      curve.reports[qi].push_back(make_report(specs[mi], models[mi].hp, std::move(part)));
    }
  }
  return curve;
}

}  // namespace rfs::eval
