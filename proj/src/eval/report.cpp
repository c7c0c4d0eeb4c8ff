#include <cmath>
#include <cstdio>

#include "rfs/eval.hpp"
#include "rfs/nominal.hpp"
#include "rfs/util.hpp"

namespace rfs::eval {

namespace {

nlohmann::json opt(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string cell(const std::optional<double>& v) { return v && !std::isnan(*v) ? format_double(*v) : "NA"; }
std::string cell(double v) { return std::isnan(v) ? "NA" : format_double(v); }

std::string summary_columns(const EvalReport& r) {
  std::string out;
  for (const auto& m : kMetrics) {
    const auto& s = r.aggregate.at(m);
    out += "," + cell(s.mean) + "," + cell(s.std);
  }
  return out;
}

std::string summary_header() {
  std::string out;
  for (const auto& m : kMetrics) out += "," + m + "_mean," + m + "_std";
  return out;
}

void fold_rows(std::string& out, const std::string& prefix, const EvalReport& r) {
  for (const auto& f : r.folds) {
    for (const char* m : {"roc", "leo", "sp", "threshold"}) {
      out += prefix + std::to_string(f.fold) + "," + m + "," + cell(r.metric(f, m)) + "\n";
    }
  }
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["dataset"] = dataset_id;
  j["model"] = std::string(to_string(family));
  j["hyperparams"] = nominal::hyperparams_to_json(hp);
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["dataset_hash"] = dataset_hash;
  auto& agg = j["aggregate"] = nlohmann::json::object();
  for (const auto& [name, s] : aggregate) agg[name] = {{"mean", num(s.mean)}, {"std", num(s.std)}, {"count", s.count}};
  auto& fs = j["folds"] = nlohmann::json::array();
  for (const auto& f : folds) {
    nlohmann::json e = {{"fold", f.fold},
                        {"n_train", f.n_train},
                        {"n_test", f.n_test},
                        {"status", std::string(to_string(f.status))},
                        {"roc", opt(f.roc)},
                        {"leo", opt(f.leo)},
                        {"sp", opt(f.sp)},
                        {"threshold", opt(f.threshold)},
                        {"hyperparams", nominal::hyperparams_to_json(f.hp)},
                        {"diagnostics", f.diagnostics}};
    if (!f.message.empty()) e["message"] = f.message;
    fs.push_back(std::move(e));
  }
  return j;
}

std::string folds_csv(const std::vector<EvalReport>& reports) {
  std::string out = "dataset,model,fold,metric,value\n";
  for (const auto& r : reports) {
    fold_rows(out, csv_escape(r.dataset_id) + "," + std::string(to_string(r.family)) + ",", r);
  }
  return out;
}

std::string grid_csv(const GridResult& g) {
  std::string out = "rho,eta,kappa_s,kappa_y,lambda" + summary_header() + ",folds_ok,best\n";
  for (std::size_t i = 0; i < g.reports.size(); ++i) {
    const auto& r = g.reports[i];
    int ok = 0;
    for (const auto& f : r.folds) ok += f.status != FoldStatus::Failed;
    out += cell(r.hp.rho) + "," + cell(r.hp.eta) + "," + cell(r.hp.kappa_s) + "," + cell(r.hp.kappa_y) + "," +
           cell(r.hp.lambda) + summary_columns(r) + "," + std::to_string(ok) + "," + (i == g.best ? "1" : "0") + "\n";
  }
  return out;
}

std::string sweep_csv(const SweepTable& table) {
  std::string out;
  for (const auto& c : table.columns) out += c + ",";
  out += "model" + summary_header() + "\n";
  for (const auto& p : table.points) {
    for (double v : p.values) out += cell(v) + ",";
    out += std::string(to_string(p.report.family)) + summary_columns(p.report) + "\n";
  }
  return out;
}

std::string shift_csv(const ShiftCurve& curve) {
  std::string out = "q,model" + summary_header() + "\n";
  for (std::size_t qi = 0; qi < curve.q.size(); ++qi) {
    for (std::size_t mi = 0; mi < curve.models.size(); ++mi) {
      out += cell(curve.q[qi]) + "," + csv_escape(curve.models[mi].name) + summary_columns(curve.reports[qi][mi]) + "\n";
    }
  }
  return out;
}

std::string shift_folds_csv(const ShiftCurve& curve) {
  std::string out = "q,model,fold,metric,value\n";
  for (std::size_t qi = 0; qi < curve.q.size(); ++qi) {
    for (std::size_t mi = 0; mi < curve.models.size(); ++mi) {
      fold_rows(out, cell(curve.q[qi]) + "," + csv_escape(curve.models[mi].name) + ",", curve.reports[qi][mi]);
    }
  }
  return out;
}

std::string format_cell(const Summary& s) {
  if (s.count == 0 || std::isnan(s.mean)) return "NA";
  char buf[64];
  if (std::isnan(s.std)) {
    std::snprintf(buf, sizeof buf, "%.3f±NA", s.mean);
  } else {
    std::snprintf(buf, sizeof buf, "%.3f±%.3f", s.mean, s.std);
  }
  return buf;
}

std::string table1_csv(const Table1& t) {
  std::string out = "metric,model";
  for (const auto& d : t.datasets) out += "," + csv_escape(d);
  out += "\n";
  for (const auto& m : t.metrics) {
    for (std::size_t mi = 0; mi < t.models.size(); ++mi) {
      out += m + "," + std::string(to_string(t.models[mi]));
      for (std::size_t di = 0; di < t.datasets.size(); ++di) {
        const auto& c = t.cells.at(di).at(mi);
        out += "," + (c ? csv_escape(format_cell(c->aggregate.at(m))) : std::string("NA"));
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace rfs::eval
