#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "rfs/dro.hpp"
#include "rfs/error.hpp"
#include "rfs/eval.hpp"
#include "rfs/nominal.hpp"
#include "rfs/util.hpp"

namespace rfs::eval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double read_value(const nlohmann::json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) return kInf;
  throw ConfigError("grid entry '" + key + "' must be a number or \"inf\"");
}

std::vector<double> read_list(const nlohmann::json& j, const std::string& key) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(read_value(v, key));
  } else {
    out.push_back(read_value(j, key));
  }
  if (out.empty()) throw ConfigError("grid entry '" + key + "' is empty");
  return out;
}

nlohmann::json write_list(const std::vector<double>& v) {
  auto out = nlohmann::json::array();
  for (double x : v) out.push_back(std::isinf(x) ? nlohmann::json("inf") : nlohmann::json(x));
  return out;
}

void check_values(const std::vector<double>& v, const std::string& key, bool allow_inf) {
  if (v.empty()) throw ConfigError("grid entry '" + key + "' is empty");
  for (double x : v) {
    if (std::isnan(x) || x < 0.0 || (!allow_inf && std::isinf(x)))
      throw ConfigError("grid entry '" + key + "' has invalid value " + format_double(x));
  }
}

bool uses_rho(ModelFamily f) { return f == ModelFamily::DRLR || f == ModelFamily::DRFLR; }
bool uses_eta(ModelFamily f) { return f == ModelFamily::FLR || f == ModelFamily::DRFLR; }

}  // namespace

void HyperGrid::validate() const {
  check_values(rho, "rho", false);
  check_values(eta, "eta", false);
  check_values(kappa_s, "kappa_s", true);
  check_values(kappa_y, "kappa_y", true);
  check_values(lambda, "lambda", false);
}

std::vector<HyperParams> HyperGrid::points(ModelFamily family, const EtaRule& rule) const {
  validate();
  const std::vector<double> zero{0.0};
  const std::vector<double> one{1.0};
  const auto& rhos = uses_rho(family) ? rho : zero;
  const auto& etas = uses_eta(family) && rule.kind == EtaRule::Kind::Grid ? eta : zero;
  const auto& kss = family == ModelFamily::DRFLR ? kappa_s : one;
  const auto& kys = uses_rho(family) ? kappa_y : one;
  const auto& lams = family == ModelFamily::LRL2 ? lambda : zero;

  std::vector<HyperParams> out;
  for (double r : rhos)
    for (double e : etas)
      for (double ks : kss)
        for (double ky : kys)
          for (double l : lams) {
            HyperParams hp;
            hp.rho = r;
            hp.eta = e;
            hp.kappa_s = ks;
            hp.kappa_y = ky;
            hp.lambda = l;
            hp.halve_kappa_y = halve_kappa_y;
            out.push_back(hp);
          }
  return out;
}

HyperGrid HyperGrid::single(const HyperParams& hp) {
  HyperGrid g;
  g.rho = {hp.rho};
  g.eta = {hp.eta};
  g.kappa_s = {hp.kappa_s};
  g.kappa_y = {hp.kappa_y};
  g.lambda = {hp.lambda};
  g.halve_kappa_y = hp.halve_kappa_y;
  return g;
}

HyperGrid HyperGrid::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("grid must be an object");
  HyperGrid g;
  for (const auto& [key, v] : j.items()) {
    if (key == "rho") g.rho = read_list(v, key);
    else if (key == "eta") g.eta = read_list(v, key);
    else if (key == "kappa_s") g.kappa_s = read_list(v, key);
    else if (key == "kappa_y") g.kappa_y = read_list(v, key);
    else if (key == "lambda") g.lambda = read_list(v, key);
    else if (key == "halve_kappa_y") {
      if (!v.is_boolean()) throw ConfigError("grid entry 'halve_kappa_y' must be a boolean");
      g.halve_kappa_y = v.get<bool>();
    } else {
      throw ConfigError("unknown grid key '" + key + "'");
    }
  }
  g.validate();
  return g;
}

nlohmann::json HyperGrid::to_json() const {
  return {{"rho", write_list(rho)},         {"eta", write_list(eta)},       {"kappa_s", write_list(kappa_s)},
          {"kappa_y", write_list(kappa_y)}, {"lambda", write_list(lambda)}, {"halve_kappa_y", halve_kappa_y}};
}

HyperGrid default_grid(ModelFamily family) {
  HyperGrid g;
  const std::vector<double> kappas{0.1, 0.2, 0.4, 0.8};
  switch (family) {
    case ModelFamily::LR:
    case ModelFamily::FLR:
      break;
    case ModelFamily::LRL2:
      g.lambda.clear();
      for (int i = 0; i < 7; ++i) g.lambda.push_back(std::pow(10.0, -4.0 + 5.0 * i / 6.0));
      break;
    case ModelFamily::DRFLR:
      g.kappa_s = kappas;
      [[fallthrough]];
    case ModelFamily::DRLR:
      g.rho = {0.0, 0.001, 0.005, 0.01, 0.05, 0.1};
      g.kappa_y = kappas;
      break;
  }
  return g;
}

void ExperimentSpec::validate() const {
  if (!raw) throw ConfigError("experiment has no data");
  if (k < 2) throw ConfigError("k must be at least 2");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (eta_rule.kind == EtaRule::Kind::FixedFraction && !(eta_rule.fraction >= 0.0 && eta_rule.fraction <= 1.0))
    throw ConfigError("eta fraction must lie in [0, 1]");
  if (!(solver.gap_tol > 0.0) || !(solver.feas_tol > 0.0) || solver.max_iter < 1)
    throw ConfigError("invalid solver options");
  preprocess.validate();
  grid.validate();
}

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json j;
  j["dataset"] = dataset_id;
  j["dataset_hash"] = dataset_hash;
  j["preprocess"] = preprocess.to_json();
  j["family"] = std::string(to_string(family));
  j["grid"] = grid.to_json();
  j["k"] = k;
  j["seed"] = seed;
  j["eta_rule"] = {{"kind", eta_rule.kind == EtaRule::Kind::Grid ? "grid" : "fraction"},
                   {"fraction", eta_rule.fraction}};
  j["solver"] = {{"gap_tol", solver.gap_tol}, {"feas_tol", solver.feas_tol}, {"max_iter", solver.max_iter}};
  return j;
}

std::string ExperimentSpec::config_hash() const { return hex64(fnv1a(to_json().dump())); }

std::string fingerprint(const data::RawTable& raw) {
  std::string buf;
  buf.reserve(raw.target.size() * 16 * (raw.columns.size() + 1));
  for (const auto& c : raw.columns) {
    buf += c.name;
    buf += c.kind == data::ColumnKind::Numeric ? "#n\n" : "#c\n";
    if (c.kind == data::ColumnKind::Numeric) {
      for (const auto& v : c.numeric) {
        buf += v ? format_double(*v) : std::string("NA");
        buf += ',';
      }
    } else {
      for (const auto& v : c.levels) {
        buf += v ? *v : std::string("\x01");
        buf += ',';
      }
    }
    buf += '\n';
  }
  for (int t : raw.target) buf += t ? '1' : '0';
  return hex64(fnv1a(buf));
}

FitOutcome fit_family(ModelFamily family, const data::Dataset& train, const HyperParams& hp, const EtaRule& rule,
                      const conic::SolveOptions& solver) {
  FitOutcome out;
  out.hp = hp;
  if (uses_eta(family) && rule.kind == EtaRule::Kind::FixedFraction) {
    out.hp.eta = rule.fraction * dro::eta_max(data::marginals(train));
  }

  auto take = [&](dro::DroFit fit) {
    out.weights = std::move(fit.weights);
    out.diagnostics = fit.diagnostics.to_json();
  };
  switch (family) {
    case ModelFamily::LR:
    case ModelFamily::LRL2: {
      nominal::FitInfo info;
      out.weights = family == ModelFamily::LR ? nominal::fit_lr(train.X, train.y, {}, &info)
                                              : nominal::fit_lrl2(train.X, train.y, hp.lambda, {}, &info);
      out.diagnostics = {{"iterations", info.iterations},
                         {"converged", info.converged},
                         {"objective", info.objective},
                         {"grad_norm", info.grad_norm}};
      if (!info.converged) spdlog::warn("{}: optimizer stopped at gradient norm {:.3g}", to_string(family), info.grad_norm);
      break;
    }
    case ModelFamily::FLR:
      take(dro::fit_flr(train.X, train.y, train.s, out.hp.eta, solver));
      break;
    case ModelFamily::DRLR:
      take(dro::fit_drlr(train.X, train.y, hp, solver));
      break;
    case ModelFamily::DRFLR:
      take(dro::fit_drflr(train.X, train.y, train.s, out.hp, solver));
      break;
  }
  out.weights.family = family;
  return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(workers, count); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rfs::eval
