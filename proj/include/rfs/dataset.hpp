#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rfs/types.hpp"

namespace rfs::data {

enum class ColumnKind { Numeric, Categorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
};

/// Declarative description of a delimited credit file.
///
/// JSON form:
/// {
///   "delimiter": ",",
///   "target": "creditability",
///   "age": "age_in_years",
///   "label_map": {"bad": 1, "good": 0},
///   "missing_markers": ["", "NA", "?"],
///   "columns": {"duration_in_month": "numeric", "purpose": "categorical", ...}
/// }
///
/// Columns of the file that the schema does not mention are ignored. Without
/// a label_map the target must already be coded 0/1.
struct Schema {
  std::vector<ColumnSpec> columns;
  std::string target;
  std::string age;
  std::map<std::string, int> label_map;
  char delimiter = ',';
  std::vector<std::string> missing_markers{"", "NA", "?"};

  static Schema from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct RawColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<std::optional<double>> numeric;
  std::vector<std::optional<std::string>> levels;

  std::size_t size() const { return kind == ColumnKind::Numeric ? numeric.size() : levels.size(); }
  bool missing(std::size_t row) const {
    return kind == ColumnKind::Numeric ? !numeric[row].has_value() : !levels[row].has_value();
  }
};

/// Typed table before any treatment. Feature columns are kept in schema
/// order; the age column is one of them.
struct RawTable {
  std::vector<RawColumn> columns;
  std::vector<int> target;
  std::string target_column;
  std::string age_column;

  std::size_t rows() const { return target.size(); }
  const RawColumn& column(std::string_view name) const;
  RawTable select_rows(std::span<const std::size_t> rows) const;
};

RawTable parse_table(std::string_view text, const Schema& schema);
RawTable load_csv(const std::filesystem::path& path, const Schema& schema);

/// Column semantics of the bundled German Credit file.
Schema german_credit_schema();
std::filesystem::path bundled_german_credit_path();
RawTable load_german_credit();

/// s_i = 1 iff age_i < age_threshold. Throws DataError on missing ages.
GroupVector derive_sensitive(const RawTable& raw, double age_threshold);
GroupVector derive_sensitive(std::span<const double> ages, double age_threshold);

// ---------------------------------------------------------------------------
// Preprocessing

struct LassoSetting {
  bool automatic = true;
  double lambda = 0.0;  // used when !automatic
};

struct PreprocessConfig {
  int max_categories = 10;
  /// Strict: protected iff age < threshold. 26 marks applicants aged 25 or
  /// younger as protected.
  double age_threshold = 26.0;
  LassoSetting lasso{};
  /// "auto" keeps at least min(lasso_min_features, m) features.
  int lasso_min_features = 50;
  std::optional<std::size_t> subsample_n;
  std::uint64_t seed = 0;
  bool drop_age_feature = false;

  void validate() const;
  static PreprocessConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct FeatureScaling {
  std::string name;
  double mean = 0.0;
  double scale = 1.0;
};

/// Design matrix after encoding, selection and standardization, with the
/// constant intercept column last.
struct Dataset {
  Eigen::MatrixXd X;
  Labels y;
  GroupVector s;
  std::vector<std::string> feature_names;
  std::vector<FeatureScaling> scaling;
  /// Row index into the originating RawTable.
  std::vector<std::size_t> row_ids;

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }
  Dataset subset(std::span<const std::size_t> rows) const;
};

struct NumericStats {
  std::string name;
  double median = 0.0;
  double mean = 0.0;
  double scale = 1.0;
};

struct CategoricalStats {
  std::string name;
  /// Kept levels in rank order; "<missing>" stands for absent values.
  std::vector<std::string> levels;
};

/// Statistics fitted on a row subset, applicable to any row of a table with
/// the same schema.
struct FittedPreprocessor {
  std::vector<NumericStats> numeric;
  std::vector<CategoricalStats> categorical;
  std::string age_column;
  double age_threshold = 26.0;
  double age_median = 0.0;
  bool drop_age_feature = false;
  /// Encoded feature names before selection.
  std::vector<std::string> encoded_names;
  /// Selection over encoded_names.
  std::vector<bool> mask;
  double lasso_lambda = 0.0;

  Dataset apply(const RawTable& raw) const;
  /// Encoded (standardized, unselected) feature matrix without intercept.
  Eigen::MatrixXd encode(const RawTable& raw) const;
  GroupVector sensitive(const RawTable& raw) const;
  nlohmann::json to_json() const;
};

struct Preprocessed {
  Dataset data;
  FittedPreprocessor pipeline;
};

inline constexpr const char* kMissingLevel = "<missing>";
inline constexpr const char* kOtherLevel = "<other>";
inline constexpr const char* kInterceptName = "(intercept)";

/// Fits medians, category ranks, standardization and the lasso mask on the
/// `fit_on` rows only, then transforms every row of `raw`.
/// `fixed_mask`, when given, replaces lasso selection (global selection mode).
Preprocessed preprocess(const RawTable& raw, const PreprocessConfig& cfg,
                        std::span<const std::size_t> fit_on,
                        const std::vector<bool>* fixed_mask = nullptr);

// ---------------------------------------------------------------------------
// L1 feature selection

struct LassoResult {
  std::vector<bool> mask;  // includes the intercept (always true)
  double lambda = 0.0;
  Eigen::VectorXd weights;
  int iterations = 0;
  bool converged = false;
};

/// Mean logistic loss plus lambda * sum |w_j| over all but the last
/// (intercept) coordinate. Writes the (sub)gradient when `grad` is given,
/// using sign(0) = 0.
double l1_logistic_objective(const Eigen::VectorXd& w, const Eigen::MatrixXd& X, const Labels& y,
                             double lambda, Eigen::VectorXd* grad = nullptr);

/// ||X_feat^T (y - mean(y))||_inf / n: smallest lambda that zeroes every
/// feature coefficient.
double lasso_lambda_max(const Eigen::MatrixXd& X, const Labels& y);

/// Proximal Newton (coordinate descent on each quadratic model) to a prox-gradient residual of
/// 1e-8. X carries the intercept as its last column.
LassoResult lasso_fit(const Eigen::MatrixXd& X, const Labels& y, double lambda,
                      const Eigen::VectorXd* warm_start = nullptr);

LassoResult lasso_select(const Eigen::MatrixXd& X, const Labels& y, double lambda);
/// Largest lambda on a 10-point log grid from lambda_max down to
/// 1e-3 * lambda_max that keeps at least min(min_features, m) features;
/// falls back to lambda = 0 when none does.
LassoResult lasso_select_auto(const Eigen::MatrixXd& X, const Labels& y, int min_features = 50);

// ---------------------------------------------------------------------------
// Marginals, sampling and folds

MarginalTable marginals(const Labels& y, const GroupVector& s);
MarginalTable marginals(const Dataset& d);

/// Row indices (ascending) of a stratified subsample whose (s, y) cell sizes
/// follow largest-remainder rounding of n_target * p_sy.
std::vector<std::size_t> subsample_preserving_indices(const Labels& y, const GroupVector& s,
                                                      std::size_t n_target, std::uint64_t seed);
Dataset subsample_preserving(const Dataset& d, std::size_t n_target, std::uint64_t seed);

/// Indices (ascending) of the rows surviving removal of floor(q * n_10)
/// random rows from the (s = 1, y = 0) cell.
std::vector<std::size_t> drop_subgroup_fraction_indices(const Labels& y, const GroupVector& s,
                                                        double q, std::uint64_t seed);
Dataset drop_subgroup_fraction(const Dataset& d, double q, std::uint64_t seed);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified by (s, y) cell; test folds partition [0, n) with sizes that
/// differ by at most one.
std::vector<Fold> kfold_split(const Labels& y, const GroupVector& s, int k, std::uint64_t seed);
std::vector<Fold> kfold_split(const Dataset& d, int k, std::uint64_t seed);

}  // namespace rfs::data
