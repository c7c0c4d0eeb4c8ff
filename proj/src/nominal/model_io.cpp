#include <cmath>

#include "rfs/error.hpp"
#include "rfs/nominal.hpp"
#include "rfs/util.hpp"

namespace rfs::nominal {

namespace {

nlohmann::json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    throw ConfigError(std::string("'") + key + "' must be a number or \"inf\"");
  }
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

nlohmann::json hyperparams_to_json(const HyperParams& hp) {
  return {{"rho", hp.rho},
          {"eta", hp.eta},
          {"kappa_s", number_or_inf(hp.kappa_s)},
          {"kappa_y", number_or_inf(hp.kappa_y)},
          {"lambda", hp.lambda},
          {"halve_kappa_y", hp.halve_kappa_y}};
}

HyperParams hyperparams_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("hyperparams must be an object");
  HyperParams hp;
  for (const auto& [key, _] : j.items()) {
    if (key == "rho") hp.rho = read_number(j, "rho");
    else if (key == "eta") hp.eta = read_number(j, "eta");
    else if (key == "kappa_s") hp.kappa_s = read_number(j, "kappa_s");
    else if (key == "kappa_y") hp.kappa_y = read_number(j, "kappa_y");
    else if (key == "lambda") hp.lambda = read_number(j, "lambda");
    else if (key == "halve_kappa_y") hp.halve_kappa_y = j.at(key).get<bool>();
    else throw ConfigError("unknown hyperparameter '" + key + "'");
  }
  return hp;
}

nlohmann::json to_json(const FittedModel& m) {
  nlohmann::json j;
  j["family"] = std::string(to_string(m.weights.family));
  j["feature_names"] = m.feature_names;
  j["weights"] = std::vector<double>(m.weights.w.data(), m.weights.w.data() + m.weights.w.size());
  j["hyperparams"] = hyperparams_to_json(m.hyperparams);
  auto& sc = j["standardization_params"] = nlohmann::json::array();
  for (const auto& s : m.scaling) sc.push_back({{"name", s.name}, {"mean", s.mean}, {"scale", s.scale}});
  j["seed"] = m.seed;
  j["diagnostics"] = m.diagnostics;
  if (!m.preprocessing.is_null()) j["preprocessing"] = m.preprocessing;
  return j;
}

FittedModel model_from_json(const nlohmann::json& j) {
  FittedModel m;
  try {
    m.weights.family = parse_family(j.at("family").get<std::string>());
    const auto w = j.at("weights").get<std::vector<double>>();
    m.weights.w = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (m.feature_names.size() != w.size()) throw DataError("model has mismatched feature_names and weights");
    if (j.contains("hyperparams")) m.hyperparams = hyperparams_from_json(j.at("hyperparams"));
    if (j.contains("standardization_params")) {
      for (const auto& s : j.at("standardization_params")) {
        m.scaling.push_back({s.at("name").get<std::string>(), s.at("mean").get<double>(), s.at("scale").get<double>()});
      }
    }
    if (j.contains("seed")) m.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("diagnostics")) m.diagnostics = j.at("diagnostics");
    if (j.contains("preprocessing")) m.preprocessing = j.at("preprocessing");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
  if (!m.weights.w.allFinite()) throw DataError("model weights must be finite");
  return m;
}

void save_model(const FittedModel& m, const std::filesystem::path& path) {
  write_file(path, to_json(m).dump(2) + "\n");
}

FittedModel load_model(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("model file is not JSON: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace rfs::nominal
