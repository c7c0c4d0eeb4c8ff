#include <chrono>
#include <ctime>
#include <filesystem>
#include <memory>

#include <spdlog/spdlog.h>

#include "rfs/cli.hpp"
#include "rfs/dro.hpp"
#include "rfs/error.hpp"
#include "rfs/nominal.hpp"
#include "rfs/util.hpp"

namespace rfs::cli {

namespace {

using nlohmann::json;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects the files a command writes and records them in manifest.json,
// the only output that carries timestamps.
class Output {
 public:
  Output(const RunConfig& cfg, std::string command)
      : cfg_(cfg), command_(std::move(command)), started_(utc_now()), t0_(std::chrono::steady_clock::now()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw DataError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    write_file(cfg_.output_dir / name, content);
    files_.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a", hex64(fnv1a(content))}});
    spdlog::info("wrote {}", (cfg_.output_dir / name).string());
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
  void dataset(const std::string& id, const std::string& hash) { datasets_.push_back({{"id", id}, {"hash", hash}}); }

  void finish() {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    const json config = cfg_.to_json();
    json m = {{"command", command_},
              {"config", config},
              {"config_hash", hex64(fnv1a(config.dump()))},
              {"datasets", datasets_},
              {"outputs", files_},
              {"threads", cfg_.threads},
              {"started_at", started_},
              {"finished_at", utc_now()},
              {"elapsed_seconds", elapsed}};
    write_file(cfg_.output_dir / "manifest.json", m.dump(2) + "\n");
  }

 private:
  const RunConfig& cfg_;
  std::string command_;
  std::string started_;
  std::chrono::steady_clock::time_point t0_;
  json files_ = json::array();
  json datasets_ = json::array();
};

struct Loaded {
  std::shared_ptr<const data::RawTable> raw;
  std::string hash;
};

Loaded load(const DatasetConfig& d) {
  auto raw = std::make_shared<const data::RawTable>(d.load());
  return {raw, eval::fingerprint(*raw)};
}

eval::ExperimentSpec make_spec(const RunConfig& cfg, const DatasetConfig& d, const Loaded& data,
                               const ModelConfig* model) {
  eval::ExperimentSpec spec;
  spec.dataset_id = d.id;
  spec.raw = data.raw;
  spec.dataset_hash = data.hash;
  spec.preprocess = d.preprocess;
  spec.k = cfg.eval.k;
  spec.seed = cfg.eval.seed;
  spec.solver = cfg.solver;
  spec.threads = cfg.threads;
  if (model) {
    spec.family = model->family;
    spec.eta_rule = model->eta_rule;
    spec.grid = model->grid ? *model->grid
                            : (model->hyperparams ? eval::HyperGrid::single(*model->hyperparams)
                                                  : eval::default_grid(model->family));
  }
  spec.validate();
  return spec;
}

void require_models(const RunConfig& cfg, const char* command) {
  if (cfg.models.empty()) throw ConfigError(std::string(command) + " needs at least one model");
}

void require_kind(const RunConfig& cfg, ExperimentKind kind) {
  const bool defaulted = cfg.experiment.kind == ExperimentKind::CV && cfg.experiment.params.empty();
  if (cfg.experiment.kind != kind && !defaulted) {
    throw ConfigError("config describes a '" + std::string(to_string(cfg.experiment.kind)) +
                      "' experiment, not '" + std::string(to_string(kind)) + "'");
  }
}

// Grid search when the model has a grid (or no hyperparameters), plain
// cross-validation otherwise. Writes the grid table when a search ran.
eval::EvalReport evaluate_model(const eval::ExperimentSpec& spec, const ModelConfig& m,
                                const std::vector<eval::PreparedFold>& folds, Output* out) {
  if (m.hyperparams) return eval::cross_validate(spec, *m.hyperparams, folds);
  auto g = eval::grid_search(spec, folds);
  if (out) out->write("grid_" + spec.dataset_id + "_" + m.name + ".csv", eval::grid_csv(g));
  spdlog::info("{} on {}: best of {} grid points has mean ROC {:.4f}", m.name, spec.dataset_id, g.reports.size(),
               g.best_report().aggregate.at("roc").mean);
  return g.best_report();
}

std::vector<double> numbers(const json& j, const char* key) {
  try {
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
      if (v.is_string() && v.get<std::string>() == "inf") out.push_back(std::numeric_limits<double>::infinity());
      else out.push_back(v.get<double>());
    }
    if (out.empty()) throw ConfigError(std::string("'") + key + "' is empty");
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("'") + key + "' must be a list of numbers: " + e.what());
  }
}

}  // namespace

void cmd_prep(const RunConfig& cfg) {
  Output out(cfg, "prep");
  for (const auto& d : cfg.datasets) {
    const Loaded data = load(d);
    out.dataset(d.id, data.hash);
    const auto spec = make_spec(cfg, d, data, nullptr);
    const auto rows = eval::universe(spec);
    const auto pre = data::preprocess(*data.raw, d.preprocess, rows);
    const auto ds = pre.data.subset(rows);

    std::string csv;
    for (const auto& name : ds.feature_names) csv += csv_escape(name) + ",";
    csv += "y,s,row_id\n";
    for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
      for (Eigen::Index j = 0; j < ds.X.cols(); ++j) csv += format_double(ds.X(i, j)) + ",";
      csv += std::to_string(ds.y[i]) + "," + std::to_string(ds.s[i]) + "," +
             std::to_string(ds.row_ids[static_cast<std::size_t>(i)]) + "\n";
    }
    out.write(d.id + ".prepared.csv", csv);

    const auto m = data::marginals(ds);
    json survivors = json::array();
    for (std::size_t j = 0; j < pre.pipeline.encoded_names.size(); ++j)
      if (pre.pipeline.mask[j]) survivors.push_back(pre.pipeline.encoded_names[j]);
    json stats = {{"dataset", d.id},
                  {"dataset_hash", data.hash},
                  {"rows", ds.X.rows()},
                  {"raw_rows", data.raw->target.size()},
                  {"raw_columns", data.raw->columns.size()},
                  {"marginals",
                   {{"s0_y0", m.at(0, 0)}, {"s0_y1", m.at(0, 1)}, {"s1_y0", m.at(1, 0)}, {"s1_y1", m.at(1, 1)},
                    {"sum", m.p[0] + m.p[1] + m.p[2] + m.p[3]}}},
                  {"eta_max", dro::eta_max(m)},
                  {"features",
                   {{"encoded", pre.pipeline.encoded_names.size()},
                    {"selected", survivors.size()},
                    {"with_intercept", ds.X.cols()}}},
                  {"lasso", {{"lambda", pre.pipeline.lasso_lambda}, {"survivors", survivors}}},
                  {"preprocessing", pre.pipeline.to_json()}};
    out.write_json(d.id + ".stats.json", stats);
  }
  out.finish();
}

void cmd_train(const RunConfig& cfg) {
  if (cfg.datasets.size() != 1) throw ConfigError("train needs exactly one dataset");
  if (cfg.models.size() != 1) throw ConfigError("train needs exactly one model");
  const auto& d = cfg.datasets.front();
  const auto& model = cfg.models.front();
  Output out(cfg, "train");
  const Loaded data = load(d);
  out.dataset(d.id, data.hash);
  const auto spec = make_spec(cfg, d, data, &model);

  HyperParams hp = model.hyperparams.value_or(HyperParams{});
  if (model.grid) {
    auto g = eval::grid_search(spec);
    out.write("grid_" + d.id + "_" + model.name + ".csv", eval::grid_csv(g));
    hp = g.best_report().hp;
  }

  const auto rows = eval::universe(spec);
  const auto pre = data::preprocess(*data.raw, d.preprocess, rows);
  const auto ds = pre.data.subset(rows);
  auto fit = eval::fit_family(model.family, ds, hp, model.eta_rule, cfg.solver);
  fit.diagnostics.erase("seconds");

  nominal::FittedModel fm;
  fm.weights = fit.weights;
  fm.feature_names = ds.feature_names;
  fm.hyperparams = fit.hp;
  fm.scaling = ds.scaling;
  fm.seed = cfg.eval.seed;
  fm.diagnostics = fit.diagnostics;
  fm.diagnostics["dataset"] = d.id;
  fm.diagnostics["dataset_hash"] = data.hash;
  fm.diagnostics["rows"] = ds.X.rows();
  fm.preprocessing = pre.pipeline.to_json();
  out.write_json("model.json", nominal::to_json(fm));
  out.finish();
}

void cmd_cv(const RunConfig& cfg) {
  require_kind(cfg, ExperimentKind::CV);
  require_models(cfg, "cv");
  Output out(cfg, "cv");
  std::vector<eval::EvalReport> reports;
  for (const auto& d : cfg.datasets) {
    const Loaded data = load(d);
    out.dataset(d.id, data.hash);
    const auto folds = eval::prepare_folds(make_spec(cfg, d, data, nullptr));
    for (const auto& m : cfg.models) reports.push_back(evaluate_model(make_spec(cfg, d, data, &m), m, folds, &out));
  }
  out.write("folds.csv", eval::folds_csv(reports));
  json j = json::array();
  for (const auto& r : reports) j.push_back(r.to_json());
  out.write_json("report.json", {{"reports", j}});
  out.finish();
}

void cmd_sweep(const RunConfig& cfg) {
  if (cfg.experiment.kind != ExperimentKind::Sweep) throw ConfigError("sweep needs experiment.kind = \"sweep\"");
  if (cfg.models.size() != 1) throw ConfigError("sweep needs exactly one model");
  const auto& model = cfg.models.front();
  if (model.grid) throw ConfigError("sweep varies one parameter around fixed 'hyperparams', not a grid");
  const auto& p = cfg.experiment.params;
  const auto kind = eval::parse_sweep_kind(p.at("parameter").get<std::string>());
  const auto values = numbers(p, "values");
  const auto kappa_s = kind == eval::SweepKind::Kappa ? numbers(p, "kappa_s_values") : std::vector<double>{};

  Output out(cfg, "sweep");
  json j = json::array();
  for (const auto& d : cfg.datasets) {
    const Loaded data = load(d);
    out.dataset(d.id, data.hash);
    const auto spec = make_spec(cfg, d, data, &model);
    const auto table = eval::sweep(spec, model.hyperparams.value_or(HyperParams{}), kind, values, kappa_s);
    const std::string stem = "sweep_" + std::string(eval::to_string(kind)) + "_" + d.id;
    out.write(stem + ".csv", eval::sweep_csv(table));
    std::vector<eval::EvalReport> reports;
    for (const auto& pt : table.points) reports.push_back(pt.report);
    out.write(stem + "_folds.csv", eval::folds_csv(reports));
    for (const auto& pt : table.points) j.push_back({{"dataset", d.id}, {"values", pt.values}, {"report", pt.report.to_json()}});
  }
  out.write_json("sweep.json", {{"parameter", std::string(eval::to_string(kind))}, {"points", j}});
  out.finish();
}

void cmd_shift(const RunConfig& cfg) {
  require_kind(cfg, ExperimentKind::Shift);
  require_models(cfg, "shift");
  std::vector<double> q;
  if (cfg.experiment.params.contains("q")) {
    q = numbers(cfg.experiment.params, "q");
  } else {
    for (int i = 0; i < 10; ++i) q.push_back(i / 10.0);
  }
  std::vector<eval::ShiftModel> models;
  for (const auto& m : cfg.models) {
    if (m.grid) throw ConfigError("shift needs fixed 'hyperparams' for model '" + m.name + "'");
    models.push_back({m.name, m.family, m.hyperparams.value_or(HyperParams{}), m.eta_rule});
  }

  Output out(cfg, "shift");
  for (const auto& d : cfg.datasets) {
    const Loaded data = load(d);
    out.dataset(d.id, data.hash);
    const auto curve = eval::marginal_shift_experiment(make_spec(cfg, d, data, nullptr), models, q);
    out.write("shift_" + d.id + ".csv", eval::shift_csv(curve));
    out.write("shift_folds_" + d.id + ".csv", eval::shift_folds_csv(curve));
    json j = json::array();
    for (std::size_t qi = 0; qi < curve.q.size(); ++qi)
      for (std::size_t mi = 0; mi < curve.models.size(); ++mi)
        j.push_back({{"q", curve.q[qi]}, {"model", curve.models[mi].name}, {"report", curve.reports[qi][mi].to_json()}});
    out.write_json("shift_" + d.id + ".json", {{"dataset", d.id}, {"points", j}});
  }
  out.finish();
}

void cmd_table1(const RunConfig& cfg) {
  require_kind(cfg, ExperimentKind::Table1);
  std::vector<ModelConfig> models = cfg.models;
  if (models.empty()) {
    for (auto f : kAllFamilies) models.push_back({std::string(to_string(f)), f, std::nullopt, std::nullopt, {}});
  }

  Output out(cfg, "table1");
  eval::Table1 t;
  t.metrics = cfg.eval.metrics;
  for (const auto& m : models) t.models.push_back(m.family);
  std::vector<eval::EvalReport> done;
  json cells = json::array();
  for (const auto& d : cfg.datasets) {
    t.datasets.push_back(d.id);
    auto& row = t.cells.emplace_back(models.size());
    std::vector<eval::PreparedFold> folds;
    Loaded data;
    try {
      data = load(d);
      out.dataset(d.id, data.hash);
      folds = eval::prepare_folds(make_spec(cfg, d, data, nullptr));
    } catch (const Error& e) {
      spdlog::error("table1: dataset {} unavailable, its cells are NA: {}", d.id, e.what());
      continue;
    }
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      try {
        row[mi] = evaluate_model(make_spec(cfg, d, data, &models[mi]), models[mi], folds, &out);
        done.push_back(*row[mi]);
        cells.push_back(row[mi]->to_json());
      } catch (const Error& e) {
        spdlog::error("table1: cell ({}, {}) failed, recorded as NA: {}", d.id, models[mi].name, e.what());
      }
    }
  }
  out.write("table1.csv", eval::table1_csv(t));
  out.write("table1_folds.csv", eval::folds_csv(done));
  out.write_json("table1.json", {{"cells", cells}});
  out.finish();
}

void run_command(std::string_view command, const RunConfig& cfg) {
  if (command == "prep") return cmd_prep(cfg);
  if (command == "train") return cmd_train(cfg);
  if (command == "cv") return cmd_cv(cfg);
  if (command == "sweep") return cmd_sweep(cfg);
  if (command == "shift") return cmd_shift(cfg);
  if (command == "table1") return cmd_table1(cfg);
  if (command == "run") {
    switch (cfg.experiment.kind) {
      case ExperimentKind::CV: return cmd_cv(cfg);
      case ExperimentKind::Sweep: return cmd_sweep(cfg);
      case ExperimentKind::Shift: return cmd_shift(cfg);
      case ExperimentKind::Table1: return cmd_table1(cfg);
    }
  }
  throw ConfigError("unknown command '" + std::string(command) + "'");
}

}  // namespace rfs::cli
