#include <algorithm>
#include <charconv>
#include <cmath>

#include "rfs/dataset.hpp"
#include "rfs/error.hpp"
#include "rfs/util.hpp"

#ifndef RFS_DATA_DIR
#define RFS_DATA_DIR "data"
#endif

namespace rfs::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

Schema Schema::from_json(const nlohmann::json& j) {
  Schema schema;
  if (!j.is_object()) throw ConfigError("schema must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "delimiter" && key != "target" && key != "age" && key != "label_map" &&
        key != "missing_markers" && key != "columns") {
      throw ConfigError("unknown schema key '" + key + "'");
    }
  }
  if (!j.contains("target") || !j.contains("age") || !j.contains("columns")) {
    throw ConfigError("schema requires 'target', 'age' and 'columns'");
  }
  schema.target = j.at("target").get<std::string>();
  schema.age = j.at("age").get<std::string>();
  if (j.contains("delimiter")) {
    const auto d = j.at("delimiter").get<std::string>();
    if (d.size() != 1) throw ConfigError("schema delimiter must be a single character");
    schema.delimiter = d.front();
  }
  if (j.contains("missing_markers")) {
    schema.missing_markers = j.at("missing_markers").get<std::vector<std::string>>();
  }
  if (j.contains("label_map")) {
    for (const auto& [raw, code] : j.at("label_map").items()) {
      const int v = code.get<int>();
      if (v != 0 && v != 1) throw ConfigError("label_map values must be 0 or 1");
      schema.label_map[raw] = v;
    }
  }
  for (const auto& [name, kind] : j.at("columns").items()) {
    const auto k = kind.get<std::string>();
    if (k == "numeric") {
      schema.columns.push_back({name, ColumnKind::Numeric});
    } else if (k == "categorical") {
      schema.columns.push_back({name, ColumnKind::Categorical});
    } else {
      throw ConfigError("column '" + name + "' has unknown kind '" + k + "'");
    }
  }
  const bool age_declared = std::any_of(schema.columns.begin(), schema.columns.end(),
                                        [&](const ColumnSpec& c) { return c.name == schema.age; });
  if (!age_declared) schema.columns.push_back({schema.age, ColumnKind::Numeric});
  return schema;
}

nlohmann::json Schema::to_json() const {
  nlohmann::json j;
  j["delimiter"] = std::string(1, delimiter);
  j["target"] = target;
  j["age"] = age;
  j["missing_markers"] = missing_markers;
  j["label_map"] = nlohmann::json::object();
  for (const auto& [k, v] : label_map) j["label_map"][k] = v;
  j["columns"] = nlohmann::json::object();
  for (const auto& c : columns) {
    j["columns"][c.name] = c.kind == ColumnKind::Numeric ? "numeric" : "categorical";
  }
  return j;
}

const RawColumn& RawTable::column(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c;
  }
  throw MissingColumn(std::string(name));
}

RawTable RawTable::select_rows(std::span<const std::size_t> rows) const {
  RawTable out;
  out.target_column = target_column;
  out.age_column = age_column;
  out.target.reserve(rows.size());
  for (std::size_t r : rows) out.target.push_back(target.at(r));
  for (const auto& c : columns) {
    RawColumn nc{c.name, c.kind, {}, {}};
    if (c.kind == ColumnKind::Numeric) {
      nc.numeric.reserve(rows.size());
      for (std::size_t r : rows) nc.numeric.push_back(c.numeric.at(r));
    } else {
      nc.levels.reserve(rows.size());
      for (std::size_t r : rows) nc.levels.push_back(c.levels.at(r));
    }
    out.columns.push_back(std::move(nc));
  }
  return out;
}

RawTable parse_table(std::string_view text, const Schema& schema) {
  const auto records = parse_csv(text, schema.delimiter);
  if (records.empty()) throw DataError("CSV input has no header row");
  const auto& header = records.front();

  auto find = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw MissingColumn(name);
  };

  const std::size_t target_idx = find(schema.target);
  find(schema.age);

  // Features follow the file's column order.
  std::vector<std::pair<std::size_t, ColumnSpec>> feature_cols;
  for (const auto& spec : schema.columns) {
    if (spec.name == schema.target) continue;
    feature_cols.emplace_back(find(spec.name), spec);
  }
  std::sort(feature_cols.begin(), feature_cols.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  auto is_missing = [&](std::string_view cell) {
    const auto t = trim(cell);
    return std::find(schema.missing_markers.begin(), schema.missing_markers.end(), t) !=
           schema.missing_markers.end();
  };

  RawTable table;
  table.target_column = schema.target;
  table.age_column = schema.age;
  for (const auto& [idx, spec] : feature_cols) table.columns.push_back({spec.name, spec.kind, {}, {}});

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw DataError("row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    const std::string label(trim(rec[target_idx]));
    int y = 0;
    if (!schema.label_map.empty()) {
      auto it = schema.label_map.find(label);
      if (it == schema.label_map.end()) {
        throw DataError("row " + std::to_string(r) + ": target value '" + label +
                        "' not in label_map");
      }
      y = it->second;
    } else {
      const auto v = parse_number(label);
      if (!v || (*v != 0.0 && *v != 1.0)) {
        throw DataError("row " + std::to_string(r) + ": target value '" + label + "' is not 0/1");
      }
      y = static_cast<int>(*v);
    }
    table.target.push_back(y);

    for (std::size_t c = 0; c < feature_cols.size(); ++c) {
      const auto& cell = rec[feature_cols[c].first];
      auto& col = table.columns[c];
      if (col.kind == ColumnKind::Numeric) {
        if (is_missing(cell)) {
          col.numeric.push_back(std::nullopt);
          continue;
        }
        const auto v = parse_number(cell);
        if (!v) {
          throw DataError("row " + std::to_string(r) + ", column '" + col.name +
                          "': cannot parse '" + cell + "' as a number");
        }
        col.numeric.push_back(v);
      } else {
        if (is_missing(cell)) {
          col.levels.push_back(std::nullopt);
        } else {
          col.levels.emplace_back(std::string(trim(cell)));
        }
      }
    }
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path, const Schema& schema) {
  return parse_table(read_file(path), schema);
}

Schema german_credit_schema() {
  return Schema::from_json(nlohmann::json::parse(
      read_file(std::filesystem::path(RFS_DATA_DIR) / "german_credit.schema.json")));
}

std::filesystem::path bundled_german_credit_path() {
  return std::filesystem::path(RFS_DATA_DIR) / "german_credit.csv";
}

RawTable load_german_credit() { return load_csv(bundled_german_credit_path(), german_credit_schema()); }

GroupVector derive_sensitive(std::span<const double> ages, double age_threshold) {
  GroupVector s(static_cast<Eigen::Index>(ages.size()));
  for (std::size_t i = 0; i < ages.size(); ++i) s[static_cast<Eigen::Index>(i)] = ages[i] < age_threshold ? 1 : 0;
  return s;
}

GroupVector derive_sensitive(const RawTable& raw, double age_threshold) {
  const auto& col = raw.column(raw.age_column);
  if (col.kind != ColumnKind::Numeric) throw DataError("age column must be numeric");
  std::vector<double> ages;
  ages.reserve(col.numeric.size());
  for (std::size_t i = 0; i < col.numeric.size(); ++i) {
    if (!col.numeric[i]) {
      throw DataError("age missing in row " + std::to_string(i) + "; impute before deriving groups");
    }
    ages.push_back(*col.numeric[i]);
  }
  return derive_sensitive(ages, age_threshold);
}

}  // namespace rfs::data
