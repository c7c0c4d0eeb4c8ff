#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "rfs/dataset.hpp"
#include "rfs/error.hpp"

namespace rfs::data {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string level_of(const std::optional<std::string>& v) { return v ? *v : kMissingLevel; }

}  // namespace

void PreprocessConfig::validate() const {
  if (max_categories < 1) throw ConfigError("max_categories must be >= 1");
  if (!(age_threshold > 0.0)) throw ConfigError("age_threshold must be > 0");
  if (!lasso.automatic && !(lasso.lambda >= 0.0)) throw ConfigError("lasso_lambda must be >= 0");
  if (lasso_min_features < 1) throw ConfigError("lasso_min_features must be >= 1");
  if (subsample_n && *subsample_n == 0) throw ConfigError("subsample_n must be positive");
}

PreprocessConfig PreprocessConfig::from_json(const nlohmann::json& j) {
  PreprocessConfig cfg;
  if (!j.is_object()) throw ConfigError("preprocess must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "max_categories") {
      cfg.max_categories = value.get<int>();
    } else if (key == "impute") {
      if (value.get<std::string>() != "median") throw ConfigError("only median imputation is supported");
    } else if (key == "age_threshold") {
      cfg.age_threshold = value.get<double>();
    } else if (key == "lasso_lambda") {
      if (value.is_string()) {
        if (value.get<std::string>() != "auto") throw ConfigError("lasso_lambda must be a number or \"auto\"");
        cfg.lasso.automatic = true;
      } else {
        cfg.lasso.automatic = false;
        cfg.lasso.lambda = value.get<double>();
      }
    } else if (key == "lasso_min_features") {
      cfg.lasso_min_features = value.get<int>();
    } else if (key == "subsample_n") {
      if (!value.is_null()) {
        const auto n = value.get<long long>();
        if (n <= 0) throw ConfigError("subsample_n must be positive");
        cfg.subsample_n = static_cast<std::size_t>(n);
      }
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "drop_age_feature") {
      cfg.drop_age_feature = value.get<bool>();
    } else {
      throw ConfigError("unknown preprocess key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::json PreprocessConfig::to_json() const {
  nlohmann::json j;
  j["max_categories"] = max_categories;
  j["impute"] = "median";
  j["age_threshold"] = age_threshold;
  if (lasso.automatic) {
    j["lasso_lambda"] = "auto";
  } else {
    j["lasso_lambda"] = lasso.lambda;
  }
  j["lasso_min_features"] = lasso_min_features;
  j["subsample_n"] = subsample_n ? nlohmann::json(*subsample_n) : nlohmann::json(nullptr);
  j["seed"] = seed;
  j["drop_age_feature"] = drop_age_feature;
  return j;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.X.resize(n, X.cols());
  out.y.resize(n);
  out.s.resize(n);
  out.row_ids.reserve(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
    out.X.row(i) = X.row(r);
    out.y[i] = y[r];
    out.s[i] = s[r];
    out.row_ids.push_back(row_ids.empty() ? static_cast<std::size_t>(r) : row_ids[static_cast<std::size_t>(r)]);
  }
  out.feature_names = feature_names;
  out.scaling = scaling;
  return out;
}

Eigen::MatrixXd FittedPreprocessor::encode(const RawTable& raw) const {
  const auto n = static_cast<Eigen::Index>(raw.rows());
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(encoded_names.size()));
  Eigen::Index col = 0;
  for (const auto& st : numeric) {
    const auto& c = raw.column(st.name);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& v = c.numeric[static_cast<std::size_t>(i)];
      E(i, col) = ((v ? *v : st.median) - st.mean) / st.scale;
    }
    ++col;
  }
  for (const auto& st : categorical) {
    const auto& c = raw.column(st.name);
    std::unordered_map<std::string, Eigen::Index> slot;
    for (std::size_t k = 0; k < st.levels.size(); ++k) slot.emplace(st.levels[k], static_cast<Eigen::Index>(k));
    const auto other = static_cast<Eigen::Index>(st.levels.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      auto it = slot.find(level_of(c.levels[static_cast<std::size_t>(i)]));
      E(i, col + (it == slot.end() ? other : it->second)) = 1.0;
    }
    col += other + 1;
  }
  return E;
}

GroupVector FittedPreprocessor::sensitive(const RawTable& raw) const {
  const auto& c = raw.column(age_column);
  std::vector<double> ages;
  ages.reserve(c.numeric.size());
  for (const auto& v : c.numeric) ages.push_back(v ? *v : age_median);
  return derive_sensitive(ages, age_threshold);
}

Dataset FittedPreprocessor::apply(const RawTable& raw) const {
  const Eigen::MatrixXd E = encode(raw);
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) keep.push_back(static_cast<Eigen::Index>(j));
  }
  Dataset d;
  const auto n = E.rows();
  const auto m = static_cast<Eigen::Index>(keep.size());
  d.X.resize(n, m + 1);
  for (Eigen::Index j = 0; j < m; ++j) d.X.col(j) = E.col(keep[static_cast<std::size_t>(j)]);
  d.X.col(m).setOnes();

  std::unordered_map<std::string, const NumericStats*> by_name;
  for (const auto& st : numeric) by_name.emplace(st.name, &st);
  for (auto j : keep) {
    const auto& name = encoded_names[static_cast<std::size_t>(j)];
    d.feature_names.push_back(name);
    auto it = by_name.find(name);
    if (it != by_name.end()) {
      d.scaling.push_back({name, it->second->mean, it->second->scale});
    } else {
      d.scaling.push_back({name, 0.0, 1.0});
    }
  }
  d.feature_names.emplace_back(kInterceptName);
  d.scaling.push_back({kInterceptName, 0.0, 1.0});

  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) d.y[i] = raw.target[static_cast<std::size_t>(i)];
  d.s = sensitive(raw);
  d.row_ids.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < d.row_ids.size(); ++i) d.row_ids[i] = i;
  return d;
}

nlohmann::json FittedPreprocessor::to_json() const {
  nlohmann::json j;
  j["numeric"] = nlohmann::json::array();
  for (const auto& st : numeric) {
    j["numeric"].push_back({{"name", st.name}, {"median", st.median}, {"mean", st.mean}, {"scale", st.scale}});
  }
  j["categorical"] = nlohmann::json::array();
  for (const auto& st : categorical) j["categorical"].push_back({{"name", st.name}, {"levels", st.levels}});
  j["age_column"] = age_column;
  j["age_threshold"] = age_threshold;
  j["age_median"] = age_median;
  j["lasso_lambda"] = lasso_lambda;
  std::vector<std::string> selected;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k]) selected.push_back(encoded_names[k]);
  }
  j["encoded_features"] = encoded_names.size();
  j["selected_features"] = selected;
  return j;
}

Preprocessed preprocess(const RawTable& raw, const PreprocessConfig& cfg,
                        std::span<const std::size_t> fit_on, const std::vector<bool>* fixed_mask) {
  cfg.validate();
  if (fit_on.empty()) throw DataError("preprocess: fit_on is empty");
  for (std::size_t r : fit_on) {
    if (r >= raw.rows()) throw DataError("preprocess: fit row index out of range");
  }

  FittedPreprocessor fp;
  fp.age_column = raw.age_column;
  fp.age_threshold = cfg.age_threshold;
  fp.drop_age_feature = cfg.drop_age_feature;

  for (const auto& col : raw.columns) {
    const bool is_age = col.name == raw.age_column;
    if (col.kind == ColumnKind::Numeric) {
      std::vector<double> present;
      for (std::size_t r : fit_on) {
        if (col.numeric[r]) present.push_back(*col.numeric[r]);
      }
      if (present.empty()) {
        throw DataError("column '" + col.name + "': every fit row is missing, median undefined");
      }
      NumericStats st{col.name, median_of(present), 0.0, 1.0};
      if (is_age) fp.age_median = st.median;
      if (is_age && cfg.drop_age_feature) continue;

      double sum = 0.0;
      for (std::size_t r : fit_on) sum += col.numeric[r].value_or(st.median);
      st.mean = sum / static_cast<double>(fit_on.size());
      double ss = 0.0;
      for (std::size_t r : fit_on) {
        const double d = col.numeric[r].value_or(st.median) - st.mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(fit_on.size()));
      st.scale = sd > 1e-12 * std::max(1.0, std::abs(st.mean)) ? sd : 1.0;
      fp.numeric.push_back(st);
    } else {
      // Rank by frequency on the fit rows; ties keep first appearance.
      std::vector<std::string> order;
      std::unordered_map<std::string, std::size_t> counts;
      for (std::size_t r : fit_on) {
        const auto lvl = level_of(col.levels[r]);
        if (counts.emplace(lvl, 0).second) order.push_back(lvl);
        ++counts[lvl];
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](const std::string& a, const std::string& b) { return counts[a] > counts[b]; });
      if (order.size() > static_cast<std::size_t>(cfg.max_categories)) order.resize(static_cast<std::size_t>(cfg.max_categories));
      fp.categorical.push_back({col.name, std::move(order)});
    }
  }

  for (const auto& st : fp.numeric) fp.encoded_names.push_back(st.name);
  for (const auto& st : fp.categorical) {
    for (const auto& lvl : st.levels) fp.encoded_names.push_back(st.name + "=" + lvl);
    fp.encoded_names.push_back(st.name + "=" + kOtherLevel);
  }

  if (fixed_mask) {
    if (fixed_mask->size() != fp.encoded_names.size()) {
      throw DataError("fixed feature mask does not match the encoded feature count");
    }
    fp.mask = *fixed_mask;
  } else {
    const RawTable fit_rows = raw.select_rows(fit_on);
    const Eigen::MatrixXd E = fp.encode(fit_rows);
    Eigen::MatrixXd Xf(E.rows(), E.cols() + 1);
    Xf << E, Eigen::VectorXd::Ones(E.rows());
    Labels yf(E.rows());
    for (Eigen::Index i = 0; i < yf.size(); ++i) yf[i] = fit_rows.target[static_cast<std::size_t>(i)];

    const LassoResult lr = cfg.lasso.automatic ? lasso_select_auto(Xf, yf, cfg.lasso_min_features)
                                               : lasso_select(Xf, yf, cfg.lasso.lambda);
    fp.mask.assign(lr.mask.begin(), lr.mask.end() - 1);
    fp.lasso_lambda = lr.lambda;
    spdlog::debug("lasso lambda={} kept {}/{} features", lr.lambda,
                  std::count(fp.mask.begin(), fp.mask.end(), true), fp.mask.size());
  }

  Preprocessed out;
  out.data = fp.apply(raw);
  out.pipeline = std::move(fp);
  return out;
}

}  // namespace rfs::data
