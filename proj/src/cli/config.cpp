#include <cmath>
#include <limits>
#include <set>

#include "rfs/cli.hpp"
#include "rfs/error.hpp"
#include "rfs/nominal.hpp"
#include "rfs/util.hpp"

namespace rfs::cli {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

DatasetConfig parse_dataset(const json& j, const std::filesystem::path& base) {
  only_keys(j, "dataset", {"id", "path", "schema", "preprocess"});
  DatasetConfig d;
  if (j.contains("path") && !j.at("path").is_null()) {
    d.path = resolve(j.at("path").get<std::string>(), base);
    d.id = d.path.stem().string();
  }
  if (j.contains("id")) d.id = j.at("id").get<std::string>();
  if (d.id.empty()) throw ConfigError("dataset id must not be empty");
  if (j.contains("schema") && !j.at("schema").is_null()) {
    const auto& s = j.at("schema");
    if (s.is_string()) {
      const auto path = resolve(s.get<std::string>(), base);
      try {
        d.schema = json::parse(read_file(path));
      } catch (const json::exception& e) {
        throw ConfigError("schema file " + path.string() + ": " + e.what());
      }
    } else {
      d.schema = s;
    }
    data::Schema::from_json(d.schema);
  } else if (!d.path.empty()) {
    throw ConfigError("dataset '" + d.id + "' gives a path but no schema");
  }
  if (j.contains("preprocess")) d.preprocess = data::PreprocessConfig::from_json(j.at("preprocess"));
  return d;
}

ModelConfig parse_model(const json& j) {
  only_keys(j, "model", {"name", "family", "hyperparams", "grid", "eta_fraction"});
  if (!j.contains("family")) throw ConfigError("model requires 'family'");
  ModelConfig m;
  m.family = parse_family(j.at("family").get<std::string>());
  m.name = j.contains("name") ? j.at("name").get<std::string>() : std::string(to_string(m.family));
  if (j.contains("hyperparams") && j.contains("grid")) throw ConfigError("model takes either 'hyperparams' or 'grid'");
  bool eta_given = false;
  if (j.contains("hyperparams")) {
    m.hyperparams = nominal::hyperparams_from_json(j.at("hyperparams"));
    eta_given = j.at("hyperparams").contains("eta");
  }
  if (j.contains("grid")) {
    m.grid = eval::HyperGrid::from_json(j.at("grid"));
    eta_given = j.at("grid").contains("eta");
  }
  if (j.contains("eta_fraction")) {
    if (eta_given) throw ConfigError("model takes either an explicit eta or 'eta_fraction'");
    const double f = j.at("eta_fraction").get<double>();
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("eta_fraction must lie in [0, 1]");
    m.eta_rule = {eval::EtaRule::Kind::FixedFraction, f};
  } else if (eta_given) {
    m.eta_rule.kind = eval::EtaRule::Kind::Grid;
  }
  if (m.hyperparams) {
    const auto& hp = *m.hyperparams;
    if (!(hp.rho >= 0.0) || !std::isfinite(hp.rho)) throw ConfigError("rho must be finite and >= 0");
    if (!(hp.eta >= 0.0) || !std::isfinite(hp.eta)) throw ConfigError("eta must be finite and >= 0");
    if (!(hp.kappa_s >= 0.0) || !(hp.kappa_y >= 0.0)) throw ConfigError("kappa must be >= 0");
    if (!(hp.lambda >= 0.0) || !std::isfinite(hp.lambda)) throw ConfigError("lambda must be finite and >= 0");
  }
  return m;
}

void check_params(const ExperimentConfig& e) {
  switch (e.kind) {
    case ExperimentKind::CV:
    case ExperimentKind::Table1:
      only_keys(e.params, "experiment.params", {});
      break;
    case ExperimentKind::Sweep: {
      only_keys(e.params, "experiment.params", {"parameter", "values", "kappa_s_values"});
      if (!e.params.contains("parameter") || !e.params.contains("values"))
        throw ConfigError("sweep needs 'parameter' and 'values'");
      const auto kind = eval::parse_sweep_kind(e.params.at("parameter").get<std::string>());
      if (kind == eval::SweepKind::Kappa && !e.params.contains("kappa_s_values"))
        throw ConfigError("kappa sweep needs 'kappa_s_values'");
      break;
    }
    case ExperimentKind::Shift:
      only_keys(e.params, "experiment.params", {"q"});
      break;
  }
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::CV: return "cv";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::Shift: return "shift";
    case ExperimentKind::Table1: return "table1";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "cv") return ExperimentKind::CV;
  if (name == "sweep") return ExperimentKind::Sweep;
  if (name == "shift") return ExperimentKind::Shift;
  if (name == "table1") return ExperimentKind::Table1;
  throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

data::RawTable DatasetConfig::load() const {
  if (path.empty()) return data::load_german_credit();
  if (!std::filesystem::exists(path)) throw DataError("data file not found: " + path.string());
  return data::load_csv(path, data::Schema::from_json(schema));
}

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    only_keys(j, "config", {"$schema", "dataset", "model", "models", "eval", "experiment", "solver", "output_dir"});
    RunConfig cfg;
    if (!j.contains("dataset")) throw ConfigError("config requires 'dataset'");
    const auto& ds = j.at("dataset");
    if (ds.is_array()) {
      for (const auto& d : ds) cfg.datasets.push_back(parse_dataset(d, base_dir));
    } else {
      cfg.datasets.push_back(parse_dataset(ds, base_dir));
    }
    if (cfg.datasets.empty()) throw ConfigError("config lists no dataset");
    std::set<std::string> ids;
    for (const auto& d : cfg.datasets)
      if (!ids.insert(d.id).second) throw ConfigError("duplicate dataset id '" + d.id + "'");

    if (j.contains("model") && j.contains("models")) throw ConfigError("config takes either 'model' or 'models'");
    if (j.contains("model")) cfg.models.push_back(parse_model(j.at("model")));
    if (j.contains("models")) {
      if (!j.at("models").is_array()) throw ConfigError("'models' must be an array");
      for (const auto& m : j.at("models")) cfg.models.push_back(parse_model(m));
    }

    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      only_keys(e, "eval", {"k", "seed", "metrics"});
      if (e.contains("k")) cfg.eval.k = e.at("k").get<int>();
      if (e.contains("seed")) cfg.eval.seed = e.at("seed").get<std::uint64_t>();
      if (e.contains("metrics")) {
        cfg.eval.metrics = e.at("metrics").get<std::vector<std::string>>();
        for (const auto& m : cfg.eval.metrics) {
          if (std::find(eval::kMetrics.begin(), eval::kMetrics.end(), m) == eval::kMetrics.end())
            throw ConfigError("unknown metric '" + m + "'");
        }
        if (cfg.eval.metrics.empty()) throw ConfigError("eval.metrics is empty");
      }
      if (cfg.eval.k < 2) throw ConfigError("eval.k must be at least 2");
    }

    if (j.contains("experiment")) {
      const auto& e = j.at("experiment");
      only_keys(e, "experiment", {"kind", "params"});
      if (!e.contains("kind")) throw ConfigError("experiment requires 'kind'");
      cfg.experiment.kind = parse_experiment_kind(e.at("kind").get<std::string>());
      if (e.contains("params")) cfg.experiment.params = e.at("params");
      check_params(cfg.experiment);
    }

    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      only_keys(s, "solver", {"gap_tol", "feas_tol", "max_iter"});
      if (s.contains("gap_tol")) cfg.solver.gap_tol = s.at("gap_tol").get<double>();
      if (s.contains("feas_tol")) cfg.solver.feas_tol = s.at("feas_tol").get<double>();
      if (s.contains("max_iter")) cfg.solver.max_iter = s.at("max_iter").get<int>();
      if (!(cfg.solver.gap_tol > 0.0) || !(cfg.solver.feas_tol > 0.0) || cfg.solver.max_iter < 1)
        throw ConfigError("invalid solver options");
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

json RunConfig::to_json() const {
  json j;
  auto& ds = j["dataset"] = json::array();
  for (const auto& d : datasets) {
    ds.push_back({{"id", d.id},
                  {"path", d.path.empty() ? json(nullptr) : json(d.path.string())},
                  {"schema", d.schema},
                  {"preprocess", d.preprocess.to_json()}});
  }
  auto& ms = j["models"] = json::array();
  for (const auto& m : models) {
    json e = {{"name", m.name}, {"family", std::string(rfs::to_string(m.family))}};
    if (m.hyperparams) e["hyperparams"] = nominal::hyperparams_to_json(*m.hyperparams);
    if (m.grid) e["grid"] = m.grid->to_json();
    e["eta_rule"] = {{"kind", m.eta_rule.kind == eval::EtaRule::Kind::Grid ? "grid" : "fraction"},
                     {"fraction", m.eta_rule.fraction}};
    ms.push_back(std::move(e));
  }
  j["eval"] = {{"k", eval.k}, {"seed", eval.seed}, {"metrics", eval.metrics}};
  j["experiment"] = {{"kind", std::string(to_string(experiment.kind))}, {"params", experiment.params}};
  j["solver"] = {{"gap_tol", solver.gap_tol}, {"feas_tol", solver.feas_tol}, {"max_iter", solver.max_iter}};
  return j;
}

void apply(RunConfig& cfg, const Overrides& o) {
  if (o.output) cfg.output_dir = *o.output;
  if (o.seed) cfg.eval.seed = *o.seed;
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be at least 1");
    cfg.threads = *o.threads;
  }
}

}  // namespace rfs::cli
