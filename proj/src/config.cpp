#include "pdm/config.hpp"

#include <fstream>

#include "pdm/errors.hpp"
#include "pdm/schema_text.hpp"

namespace pdm {

namespace {

using nlohmann::json;

const json& schema_doc() {
  static const json schema = json::parse(detail::kConfigSchemaJson);
  return schema;
}

// Minimal validator covering the subset of JSON Schema the published schema
// uses: type, enum, properties/required/additionalProperties, items,
// minItems, minimum, exclusiveMinimum and local $ref.
void validate_node(const json& node, const json& schema, const std::string& path) {
  auto fail = [&path](const std::string& msg) {
    throw ConfigError("config" + (path.empty() ? std::string() : " at " + path) + ": " + msg);
  };

  if (schema.contains("$ref")) {
    const std::string ref = schema["$ref"].get<std::string>();
    const std::string prefix = "#/definitions/";
    if (ref.rfind(prefix, 0) != 0) fail("unsupported $ref " + ref);
    validate_node(node, schema_doc()["definitions"][ref.substr(prefix.size())], path);
    return;
  }
  if (schema.contains("enum")) {
    for (const json& v : schema["enum"])
      if (node == v) return;
    fail("value " + node.dump() + " not in the allowed set");
  }
  if (schema.contains("type")) {
    const std::string t = schema["type"].get<std::string>();
    const bool ok = (t == "object" && node.is_object()) || (t == "array" && node.is_array()) ||
                    (t == "string" && node.is_string()) ||
                    (t == "number" && node.is_number()) ||
                    (t == "integer" && node.is_number_integer()) ||
                    (t == "boolean" && node.is_boolean());
    if (!ok) fail("expected " + t);
  }
  if (schema.contains("minimum") && node.is_number() &&
      node.get<double>() < schema["minimum"].get<double>())
    fail("value below minimum " + schema["minimum"].dump());
  if (schema.contains("exclusiveMinimum") && node.is_number() &&
      node.get<double>() <= schema["exclusiveMinimum"].get<double>())
    fail("value must exceed " + schema["exclusiveMinimum"].dump());
  if (node.is_array()) {
    if (schema.contains("minItems") && node.size() < schema["minItems"].get<std::size_t>())
      fail("fewer than " + schema["minItems"].dump() + " items");
    if (schema.contains("items")) {
      std::size_t i = 0;
      for (const json& item : node)
        validate_node(item, schema["items"], path + "[" + std::to_string(i++) + "]");
    }
  }
  if (node.is_object()) {
    const json props = schema.value("properties", json::object());
    if (schema.contains("required"))
      for (const json& key : schema["required"])
        if (!node.contains(key.get<std::string>()))
          fail("missing required key \"" + key.get<std::string>() + "\"");
    const bool closed =
        schema.contains("additionalProperties") && schema["additionalProperties"] == false;
    for (const auto& [key, value] : node.items()) {
      if (props.contains(key)) {
        validate_node(value, props[key], path.empty() ? key : path + "." + key);
      } else if (closed) {
        fail("unknown key \"" + key + "\"");
      }
    }
  }
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

CoeffFamily parse_family(const json& j) {
  CoeffFamily f;
  f.c = j.value("const", 0.0);
  f.lin_u = j.value("lin_u", 0.0);
  f.lin_v = j.value("lin_v", 0.0);
  f.sin_u = j.value("sin_u", 0.0);
  f.cos_v = j.value("cos_v", 0.0);
  f.sin_u_cos_v = j.value("sin_u_cos_v", 0.0);
  return f;
}

bool family_is_constant(const CoeffFamily& f) {
  return f.lin_u == 0.0 && f.lin_v == 0.0 && f.sin_u == 0.0 && f.cos_v == 0.0 &&
         f.sin_u_cos_v == 0.0;
}

CoefficientModel parse_model(const json& j) {
  const std::string kind = j["kind"].get<std::string>();
  const CoeffFamily sigma = parse_family(j["sigma"]);
  const CoeffFamily drift = parse_family(j["b"]);
  const double floor = j.value("ellipticity_floor", 0.0);
  if (kind == "constant") {
    if (!family_is_constant(sigma) || !family_is_constant(drift))
      throw ConfigError("config: constant model must not carry feature coefficients");
    return CoefficientModel::constant({sigma.c}, {drift.c}, 1, 1, floor);
  }
  if (kind == "markovian") return CoefficientModel::markovian(sigma, drift, floor);
  if (kind == "delay") {
    if (!j.contains("tau")) throw ConfigError("config: delay model requires \"tau\"");
    return CoefficientModel::delay(sigma, drift, j["tau"].get<double>(), floor);
  }
  return CoefficientModel::distributed_delay(sigma, drift, floor);
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "strong-rate") return ExperimentKind::strong_rate;
  if (s == "derivative-rate") return ExperimentKind::derivative_rate;
  if (s == "ibp-check") return ExperimentKind::ibp_check;
  if (s == "density-rate") return ExperimentKind::density_rate;
  if (s == "holder-norm") return ExperimentKind::holder_norm;
  return ExperimentKind::ellipticity_check;
}

// Thresholds from the acceptance ladder, per experiment kind.
CheckThresholds default_thresholds(ExperimentKind kind) {
  CheckThresholds t;
  switch (kind) {
    case ExperimentKind::strong_rate:
      t.slope_min = -0.65;
      t.slope_max = -0.35;
      t.r2_min = 0.97;
      t.increment_slope_min = -1.3;
      t.increment_slope_max = -0.7;
      break;
    case ExperimentKind::derivative_rate:
      t.slope_min = -0.7;
      t.slope_max = -0.3;
      t.r2_min = 0.0;
      break;
    case ExperimentKind::density_rate:
      t.theta_min = 0.3;
      break;
    case ExperimentKind::ibp_check:
      t.tolerance = 1e-6;
      break;
    default:
      break;
  }
  return t;
}

void require_keys(const json& doc, std::initializer_list<const char*> keys) {
  for (const char* key : keys)
    if (!doc.contains(key))
      throw ConfigError(std::string("config: experiment \"") + doc["experiment"].get<std::string>() +
                        "\" requires key \"" + key + "\"");
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::strong_rate: return "strong-rate";
    case ExperimentKind::derivative_rate: return "derivative-rate";
    case ExperimentKind::ibp_check: return "ibp-check";
    case ExperimentKind::density_rate: return "density-rate";
    case ExperimentKind::holder_norm: return "holder-norm";
    case ExperimentKind::ellipticity_check: return "ellipticity-check";
  }
  return "unknown";
}

const char* config_schema_text() { return detail::kConfigSchemaJson; }

void validate_against_schema(const nlohmann::json& doc) { validate_node(doc, schema_doc(), ""); }

ExperimentConfig parse_config(const nlohmann::json& doc) {
  validate_against_schema(doc);

  ExperimentConfig cfg;
  cfg.kind = parse_kind(doc["experiment"].get<std::string>());
  cfg.seed = doc["seed"].get<std::uint64_t>();
  cfg.output_dir = doc.value("output_dir", std::string("."));
  cfg.workers = doc.value("workers", 0);
  cfg.config_hash = hex64(fnv1a64(doc.dump()));
  cfg.check = default_thresholds(cfg.kind);

  switch (cfg.kind) {
    case ExperimentKind::strong_rate:
    case ExperimentKind::derivative_rate:
      require_keys(doc, {"model", "T", "x0", "num_paths", "coarse_steps", "fine_steps"});
      break;
    case ExperimentKind::density_rate:
      require_keys(doc, {"model", "T", "x0", "num_paths", "levels", "reference_level"});
      break;
    case ExperimentKind::ellipticity_check:
      require_keys(doc, {"model", "T", "x0", "num_paths", "steps"});
      break;
    case ExperimentKind::holder_norm:
      require_keys(doc, {"values", "spacing", "beta"});
      break;
    case ExperimentKind::ibp_check:
      break;
  }

  if (doc.contains("model")) cfg.model = parse_model(doc["model"]);
  cfg.horizon = doc.value("T", 1.0);
  cfg.x0 = doc.value("x0", 0.0);
  cfg.num_paths = doc.value("num_paths", std::size_t{0});
  if (doc.contains("coarse_steps")) cfg.coarse_steps = doc["coarse_steps"].get<std::vector<int>>();
  cfg.fine_steps = doc.value("fine_steps", 0);
  cfg.p = doc.value("p", 2.0);
  if (doc.contains("levels")) cfg.levels = doc["levels"].get<std::vector<int>>();
  cfg.reference_level = doc.value("reference_level", 0);
  if (doc.contains("betas")) cfg.betas = doc["betas"].get<std::vector<double>>();
  if (doc.contains("method")) {
    const std::string m = doc["method"].get<std::string>();
    cfg.method = m == "ibp" ? DensityMethod::ibp
                            : (m == "kernel" ? DensityMethod::kernel : DensityMethod::both);
  }
  cfg.query_points = doc.value("query_points", 41);
  cfg.query_span_std = doc.value("query_span_std", 4.0);
  cfg.second_variation_cap = doc.value("second_variation_cap", 64);
  if (doc.contains("bandwidth")) cfg.bandwidth = doc["bandwidth"].get<double>();
  cfg.quadrature_nodes = doc.value("quadrature_nodes", 96);
  if (doc.contains("values")) cfg.values = doc["values"].get<std::vector<double>>();
  cfg.spacing = doc.value("spacing", 0.0);
  cfg.beta = doc.value("beta", 0.0);
  cfg.steps = doc.value("steps", 0);
  if (cfg.beta >= 1.0) throw ConfigError("config: beta must lie in [0, 1)");
  for (double b : cfg.betas)
    if (b >= 1.0) throw ConfigError("config: betas must lie in [0, 1)");

  if (doc.contains("check")) {
    const json& c = doc["check"];
    if (c.contains("slope_min")) cfg.check.slope_min = c["slope_min"].get<double>();
    if (c.contains("slope_max")) cfg.check.slope_max = c["slope_max"].get<double>();
    if (c.contains("r2_min")) cfg.check.r2_min = c["r2_min"].get<double>();
    if (c.contains("increment_slope_min"))
      cfg.check.increment_slope_min = c["increment_slope_min"].get<double>();
    if (c.contains("increment_slope_max"))
      cfg.check.increment_slope_max = c["increment_slope_max"].get<double>();
    if (c.contains("theta_min")) cfg.check.theta_min = c["theta_min"].get<double>();
    if (c.contains("decrease_sigmas")) cfg.check.decrease_sigmas = c["decrease_sigmas"].get<double>();
    if (c.contains("tolerance")) cfg.check.tolerance = c["tolerance"].get<double>();
    if (c.contains("exact_threshold"))
      cfg.check.exact_threshold = c["exact_threshold"].get<double>();
    if (c.contains("min_eigenvalue")) cfg.check.min_eigenvalue = c["min_eigenvalue"].get<double>();
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: JSON parse error in " + path + ": " + e.what());
  }
  return parse_config(doc);
}

}  // namespace pdm
