#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rfs/conic.hpp"
#include "rfs/dataset.hpp"
#include "rfs/error.hpp"
#include "rfs/types.hpp"

namespace rfs::eval {

/// How eta is set for the fair families: taken from the grid, or as a
/// fraction of eta_max computed on each training fold.
struct EtaRule {
  enum class Kind { Grid, FixedFraction };
  Kind kind = Kind::FixedFraction;
  double fraction = 0.9;
};

/// Candidate values per hyperparameter. Each family expands only the
/// parameters it reads.
struct HyperGrid {
  std::vector<double> rho{0.0};
  std::vector<double> eta{0.0};
  std::vector<double> kappa_s{1.0};
  std::vector<double> kappa_y{1.0};
  std::vector<double> lambda{0.0};
  bool halve_kappa_y = false;

  void validate() const;
  /// Cartesian product in the order rho, eta, kappa_s, kappa_y, lambda.
  std::vector<HyperParams> points(ModelFamily family, const EtaRule& rule) const;
  /// The grid holding exactly one value per parameter.
  static HyperGrid single(const HyperParams& hp);

  static HyperGrid from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Default search grid of a family: rho in {0, .001, .005, .01, .05, .1},
/// kappa in {.1, .2, .4, .8}, lambda on 7 log-spaced points in [1e-4, 10].
HyperGrid default_grid(ModelFamily family);

struct ExperimentSpec {
  std::string dataset_id = "data";
  std::shared_ptr<const data::RawTable> raw;
  /// Fingerprint of the source data, carried into report provenance.
  std::string dataset_hash;
  data::PreprocessConfig preprocess;
  ModelFamily family = ModelFamily::LR;
  HyperGrid grid;
  int k = 5;
  std::uint64_t seed = 0;
  EtaRule eta_rule;
  conic::SolveOptions solver;
  /// Upper bound on worker threads; results do not depend on it.
  int threads = 1;

  void validate() const;
  /// Everything that determines the results, as canonical JSON.
  nlohmann::json to_json() const;
  std::string config_hash() const;
};

/// Hash of a raw table's contents.
std::string fingerprint(const data::RawTable& raw);

// ---------------------------------------------------------------------------
// Single fits

struct FitOutcome {
  WeightVector weights;
  /// Hyperparameters actually used (eta resolved by the rule).
  HyperParams hp;
  nlohmann::json diagnostics = nlohmann::json::object();
};

/// Fits one family on a design whose last column is the intercept.
FitOutcome fit_family(ModelFamily family, const data::Dataset& train, const HyperParams& hp,
                      const EtaRule& rule, const conic::SolveOptions& solver);

// ---------------------------------------------------------------------------
// Folds and reports

/// Preprocessed train/test split; preprocessing is fitted on the train rows.
struct PreparedFold {
  int fold = 0;
  data::Dataset train;
  data::Dataset test;
  nlohmann::json preprocessing;
};

/// Row indices of the raw table the experiment runs on (all rows, or the
/// marginal-preserving subsample when configured).
std::vector<std::size_t> universe(const ExperimentSpec& spec);
/// Sensitive group of every raw row, used for stratification and sampling.
/// Missing ages take the median of the observed ones.
GroupVector group_labels(const data::RawTable& raw, double age_threshold);
std::vector<data::Fold> make_folds(const ExperimentSpec& spec);
PreparedFold prepare_fold(const ExperimentSpec& spec, int fold, const std::vector<std::size_t>& train_rows,
                          const std::vector<std::size_t>& test_rows);
std::vector<PreparedFold> prepare_folds(const ExperimentSpec& spec);

enum class FoldStatus { Ok, UndefinedMetric, Failed };
std::string_view to_string(FoldStatus s);

struct FoldResult {
  int fold = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  HyperParams hp;
  FoldStatus status = FoldStatus::Ok;
  std::string message;
  /// Category of the failure when status is Failed.
  ExitCode error = ExitCode::Success;
  std::optional<double> roc;
  std::optional<double> leo;
  std::optional<double> sp;
  std::optional<double> threshold;
  nlohmann::json diagnostics = nlohmann::json::object();
};

/// Mean and sample standard deviation over the folds where the metric is
/// defined, in fold order.
struct Summary {
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
};

inline const std::vector<std::string> kMetrics = {"roc", "leo", "sp"};

struct EvalReport {
  std::string dataset_id;
  ModelFamily family = ModelFamily::LR;
  HyperParams hp;
  std::vector<FoldResult> folds;
  std::map<std::string, Summary> aggregate;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string dataset_hash;

  std::optional<double> metric(const FoldResult& f, const std::string& name) const;
  /// Recomputes `aggregate` from the per-fold values.
  void summarize();
  nlohmann::json to_json() const;
};

Summary summarize(const std::vector<double>& values);

/// Fits on the train part and scores the test part of a prepared fold.
FoldResult evaluate_fold(const ExperimentSpec& spec, const PreparedFold& fold, const HyperParams& hp);

EvalReport cross_validate(const ExperimentSpec& spec, const HyperParams& hp);
EvalReport cross_validate(const ExperimentSpec& spec, const HyperParams& hp, const std::vector<PreparedFold>& folds);

struct GridResult {
  std::size_t best = 0;
  std::vector<EvalReport> reports;

  const EvalReport& best_report() const { return reports.at(best); }
};

/// Evaluates every grid point; best = highest mean ROC, ties to smaller rho,
/// then smaller eta. Throws SolverError when every point failed.
GridResult grid_search(const ExperimentSpec& spec);
GridResult grid_search(const ExperimentSpec& spec, const std::vector<PreparedFold>& folds);
/// Index of the best report by the rule above, or nullopt when none has a
/// defined mean ROC.
std::optional<std::size_t> select_best(const std::vector<EvalReport>& reports);

// ---------------------------------------------------------------------------
// Sweeps and the marginal shift experiment

enum class SweepKind { Rho, Eta, EtaFraction, Kappa };
std::string_view to_string(SweepKind k);
SweepKind parse_sweep_kind(std::string_view name);

struct SweepPoint {
  /// Parameter values of the point: one entry, or (kappa_y, kappa_s).
  std::vector<double> values;
  EvalReport report;
};

struct SweepTable {
  SweepKind kind = SweepKind::Rho;
  std::vector<std::string> columns;
  std::vector<SweepPoint> points;
};

/// Varies one parameter (or the kappa_y x kappa_s grid) around `base`,
/// holding the others fixed, with shared folds.
SweepTable sweep(const ExperimentSpec& spec, const HyperParams& base, SweepKind kind,
                 const std::vector<double>& grid, const std::vector<double>& kappa_s_grid = {});

struct ShiftModel {
  std::string name;
  ModelFamily family = ModelFamily::LR;
  HyperParams hp;
  /// Replaces the experiment's eta rule for this model.
  std::optional<EtaRule> eta_rule;
};

struct ShiftCurve {
  std::vector<double> q;
  std::vector<ShiftModel> models;
  /// reports[qi][mi]
  std::vector<std::vector<EvalReport>> reports;
};

/// For each fold and q, removes floor(q n_10) of the training fold's
/// (s = 1, y = 0) rows, refits preprocessing and every model on what is
/// left and scores the untouched test fold. q must increase strictly in [0, 1).
ShiftCurve marginal_shift_experiment(const ExperimentSpec& spec, const std::vector<ShiftModel>& models,
                                     const std::vector<double>& q_grid);

// ---------------------------------------------------------------------------
// Report files

/// Long format: dataset,model,fold,metric,value (one row per fold and metric,
/// NA where undefined).
std::string folds_csv(const std::vector<EvalReport>& reports);
std::string sweep_csv(const SweepTable& table);
std::string shift_csv(const ShiftCurve& curve);
/// Long format per fold for the shift experiment: q,model,fold,metric,value.
std::string shift_folds_csv(const ShiftCurve& curve);

struct Table1 {
  std::vector<std::string> datasets;
  std::vector<ModelFamily> models;
  std::vector<std::string> metrics = kMetrics;
  /// cells[dataset][model]; nullopt for a failed cell.
  std::vector<std::vector<std::optional<EvalReport>>> cells;
};
/// Rows metric x model, columns datasets, cells "mean±std" with three decimals.
std::string table1_csv(const Table1& t);
std::string format_cell(const Summary& s);

/// One row per grid point: hyperparameters, per-metric mean and std, and a
/// flag on the selected point.
std::string grid_csv(const GridResult& g);

/// Calls fn(i) for i in [0, count) on at most `threads` workers. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace rfs::eval
