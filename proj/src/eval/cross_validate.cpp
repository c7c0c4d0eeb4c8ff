#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "rfs/error.hpp"
#include "rfs/eval.hpp"
#include "rfs/metrics.hpp"
#include "rfs/nominal.hpp"

namespace rfs::eval {

GroupVector group_labels(const data::RawTable& raw, double threshold) {
  const auto& col = raw.column(raw.age_column);
  std::vector<double> seen;
  for (const auto& v : col.numeric)
    if (v) seen.push_back(*v);
  if (seen.empty()) throw DataError("age column '" + raw.age_column + "' has no values");
  std::sort(seen.begin(), seen.end());
  const std::size_t h = seen.size() / 2;
  const double median = seen.size() % 2 ? seen[h] : 0.5 * (seen[h - 1] + seen[h]);
  std::vector<double> ages;
  ages.reserve(col.numeric.size());
  for (const auto& v : col.numeric) ages.push_back(v ? *v : median);
  return data::derive_sensitive(ages, threshold);
}

namespace {

Labels labels_of(const data::RawTable& raw, const std::vector<std::size_t>& rows) {
  Labels y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y[static_cast<Eigen::Index>(i)] = raw.target[rows[i]];
  return y;
}

GroupVector pick(const GroupVector& s, const std::vector<std::size_t>& rows) {
  GroupVector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = s[static_cast<Eigen::Index>(rows[i])];
  return out;
}

std::vector<std::size_t> map_rows(const std::vector<std::size_t>& local, const std::vector<std::size_t>& base) {
  std::vector<std::size_t> out;
  out.reserve(local.size());
  for (std::size_t i : local) out.push_back(base[i]);
  return out;
}

template <typename F>
std::optional<double> guarded(F&& f, std::vector<std::string>& notes, const char* name) {
  try {
    return f();
  } catch (const UndefinedMetric& e) {
    notes.push_back(std::string(name) + ": " + e.what());
    return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(FoldStatus s) {
  switch (s) {
    case FoldStatus::Ok: return "ok";
    case FoldStatus::UndefinedMetric: return "undefined_metric";
    case FoldStatus::Failed: return "failed";
  }
  return "?";
}

std::vector<std::size_t> universe(const ExperimentSpec& spec) {
  const auto& raw = *spec.raw;
  std::vector<std::size_t> all(raw.target.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto& n = spec.preprocess.subsample_n;
  if (!n) return all;
  if (*n > all.size()) {
    throw ConfigError("subsample_n " + std::to_string(*n) + " exceeds the " + std::to_string(all.size()) +
                      " available rows");
  }
  const Labels y = labels_of(raw, all);
  const GroupVector s = group_labels(raw, spec.preprocess.age_threshold);
  return data::subsample_preserving_indices(y, s, *n, spec.preprocess.seed);
}

std::vector<data::Fold> make_folds(const ExperimentSpec& spec) {
  const auto rows = universe(spec);
  const GroupVector s_all = group_labels(*spec.raw, spec.preprocess.age_threshold);
  auto folds = data::kfold_split(labels_of(*spec.raw, rows), pick(s_all, rows), spec.k, spec.seed);
  for (auto& f : folds) {
    f.train = map_rows(f.train, rows);
    f.test = map_rows(f.test, rows);
  }
  return folds;
}

PreparedFold prepare_fold(const ExperimentSpec& spec, int fold, const std::vector<std::size_t>& train_rows,
                          const std::vector<std::size_t>& test_rows) {
  const auto pre = data::preprocess(*spec.raw, spec.preprocess, train_rows);
  PreparedFold out;
  out.fold = fold;
  out.train = pre.data.subset(train_rows);
  out.test = pre.data.subset(test_rows);
  out.preprocessing = pre.pipeline.to_json();
  return out;
}

std::vector<PreparedFold> prepare_folds(const ExperimentSpec& spec) {
  spec.validate();
  const auto folds = make_folds(spec);
  std::vector<PreparedFold> out(folds.size());
  parallel_for(folds.size(), spec.threads, [&](std::size_t f) {
    out[f] = prepare_fold(spec, static_cast<int>(f), folds[f].train, folds[f].test);
  });
  return out;
}

FoldResult evaluate_fold(const ExperimentSpec& spec, const PreparedFold& fold, const HyperParams& hp) {
  FoldResult r;
  r.fold = fold.fold;
  r.n_train = static_cast<std::size_t>(fold.train.y.size());
  r.n_test = static_cast<std::size_t>(fold.test.y.size());
  r.hp = hp;
  try {
    FitOutcome fit = fit_family(spec.family, fold.train, hp, spec.eta_rule, spec.solver);
    r.hp = fit.hp;
    r.diagnostics = std::move(fit.diagnostics);
    r.diagnostics.erase("seconds");
    const ScoreVector score = nominal::predict_proba(fit.weights, fold.test.X);
    const auto& y = fold.test.y;
    const auto& s = fold.test.s;

    std::vector<std::string> notes;
    r.roc = guarded([&] { return metrics::roc_auc(score, y); }, notes, "roc");
    r.threshold = guarded([&] { return metrics::youden_threshold(score, y); }, notes, "threshold");
    if (r.threshold) r.sp = guarded([&] { return metrics::sp(score, y, s, *r.threshold); }, notes, "sp");
    r.leo = guarded([&] { return metrics::leo(score, y, s); }, notes, "leo");
    if (!notes.empty()) {
      r.status = FoldStatus::UndefinedMetric;
      for (const auto& n : notes) r.message += (r.message.empty() ? "" : "; ") + n;
      spdlog::warn("{} fold {}: {}", to_string(spec.family), fold.fold, r.message);
    }
  } catch (const Error& e) {
    r.status = FoldStatus::Failed;
    r.error = e.exit_code();
    r.message = e.what();
    r.roc = r.leo = r.sp = r.threshold = std::nullopt;
    spdlog::warn("{} fold {} failed: {}", to_string(spec.family), fold.fold, r.message);
  }
  return r;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) {
    s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) {
    s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return s;
}

std::optional<double> EvalReport::metric(const FoldResult& f, const std::string& name) const {
  if (name == "roc") return f.roc;
  if (name == "leo") return f.leo;
  if (name == "sp") return f.sp;
  if (name == "threshold") return f.threshold;
  throw ConfigError("unknown metric '" + name + "'");
}

void EvalReport::summarize() {
  aggregate.clear();
  for (const auto& name : kMetrics) {
    std::vector<double> values;
    for (const auto& f : folds)
      if (auto v = metric(f, name)) values.push_back(*v);
    aggregate[name] = eval::summarize(values);
  }
}

namespace {

EvalReport assemble(const ExperimentSpec& spec, const HyperParams& hp, std::vector<FoldResult> folds) {
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

bool all_failed(const EvalReport& r) {
  return std::all_of(r.folds.begin(), r.folds.end(), [](const FoldResult& f) { return f.status == FoldStatus::Failed; });
}

[[noreturn]] void raise(ExitCode code, const std::string& msg) {
  switch (code) {
    case ExitCode::ConfigError: throw ConfigError(msg);
    case ExitCode::SolverFailure: throw SolverError(msg);
    default: throw DataError(msg);
  }
}

}  // namespace

EvalReport cross_validate(const ExperimentSpec& spec, const HyperParams& hp) {
  return cross_validate(spec, hp, prepare_folds(spec));
}

EvalReport cross_validate(const ExperimentSpec& spec, const HyperParams& hp, const std::vector<PreparedFold>& folds) {
  std::vector<FoldResult> results(folds.size());
  parallel_for(folds.size(), spec.threads, [&](std::size_t f) { results[f] = evaluate_fold(spec, folds[f], hp); });
  EvalReport rep = assemble(spec, hp, std::move(results));
  if (!rep.folds.empty() && all_failed(rep)) {
    raise(rep.folds.front().error, std::string(to_string(spec.family)) + ": every fold failed: " + rep.folds.front().message);
  }
  return rep;
}

std::optional<std::size_t> select_best(const std::vector<EvalReport>& reports) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& a = reports[i].aggregate.at("roc");
    if (a.count == 0 || std::isnan(a.mean)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = reports[*best].aggregate.at("roc");
    const auto& ha = reports[i].hp;
    const auto& hb = reports[*best].hp;
    if (a.mean > b.mean || (a.mean == b.mean && (ha.rho < hb.rho || (ha.rho == hb.rho && ha.eta < hb.eta)))) best = i;
  }
  return best;
}

GridResult grid_search(const ExperimentSpec& spec) { return grid_search(spec, prepare_folds(spec)); }

GridResult grid_search(const ExperimentSpec& spec, const std::vector<PreparedFold>& folds) {
  const auto points = spec.grid.points(spec.family, spec.eta_rule);
  const std::size_t nf = folds.size();
  std::vector<FoldResult> results(points.size() * nf);
  parallel_for(results.size(), spec.threads,
               [&](std::size_t i) { results[i] = evaluate_fold(spec, folds[i % nf], points[i / nf]); });

  GridResult out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<FoldResult> part(results.begin() + static_cast<std::ptrdiff_t>(p * nf),
                                 results.begin() + static_cast<std::ptrdiff_t>((p + 1) * nf));
    out.reports.push_back(assemble(spec, points[p], std::move(part)));
  }
  const auto best = select_best(out.reports);
  if (!best) {
    std::string msg = std::string(to_string(spec.family)) + ": every grid point failed";
    ExitCode code = ExitCode::DataError;
    for (const auto& r : results) {
      if (r.status == FoldStatus::Failed) {
        msg += ": " + r.message;
        code = r.error;
        break;
      }
    }
    raise(code, msg);
  }
  out.best = *best;
  return out;
}

}  // namespace rfs::eval
