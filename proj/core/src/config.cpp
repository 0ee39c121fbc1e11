#include "gperot/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gperot/toml_lite.hpp"

namespace gperot {

namespace {

using json = nlohmann::json;

double num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

long long integer(const json& obj, const char* key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
  return v.get<long long>();
}

std::string text(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

const char* to_string(PreconditionerSource s) {
  return s == PreconditionerSource::LinearPart ? "linear_part" : "initial_state";
}

PreconditionerSource parse_source(const std::string& s) {
  if (s == "linear_part") return PreconditionerSource::LinearPart;
  if (s == "initial_state") return PreconditionerSource::InitialState;
  throw ConfigError("unknown preconditioner '" + s + "'");
}

}  // namespace

json config_to_json(const ConfigFile& c) {
  json doc;
  const auto& m = c.model;
  json model;
  model["name"] = c.name;
  model["domain"] = {m.domain.x_min, m.domain.x_max, m.domain.y_min, m.domain.y_max};
  model["elements_per_dir"] = m.elements_per_dir;
  model["quad_order"] = m.quad_order;
  json k = json::array();
  for (Index i = 0; i < m.interaction.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.interaction.cols(); ++j) row.push_back(m.interaction(i, j));
    k.push_back(row);
  }
  model["interaction"] = k;
  doc["model"] = model;

  json comps = json::array();
  for (const auto& cs : m.components) {
    json cj;
    cj["mass"] = cs.mass;
    cj["omega"] = cs.omega;
    cj["margin"] = cs.margin;
    const auto& v = cs.potential;
    cj["potential"] = {{"quad_x", v.quad_x}, {"quad_y", v.quad_y}, {"sin_x", v.sin_x},
                       {"wave_x", v.wave_x}, {"sin_y", v.sin_y},   {"wave_y", v.wave_y}};
    comps.push_back(cj);
  }
  doc["component"] = comps;

  const auto& r = c.run;
  json run;
  run["method"] = to_string(r.method);
  run["omega"] = r.omega;
  run["step"] = to_string(r.step);
  run["tol"] = r.stop_residual;
  run["tol_cg"] = r.tol_cg;
  run["cg_floor"] = r.cg_floor;
  run["max_iters"] = r.max_iters;
  run["warm_start"] = r.warm_start;
  run["warm_start_residual"] = r.warm_start_residual;
  run["max_warm_iters"] = r.max_warm_iters;
  run["record_every"] = r.record_every;
  run["fallback"] = to_string(r.fallback);
  run["preconditioner"] = to_string(r.preconditioner);
  doc["run"] = run;
  return doc;
}

ConfigFile config_from_json(const json& doc) {
  ConfigFile c;
  if (!doc.contains("model") || !doc["model"].is_object()) throw ConfigError("config: missing [model] table");
  const json& model = doc["model"];
  c.name = text(model, "name", "custom");
  if (model.contains("domain")) {
    const auto& d = model["domain"];
    if (!d.is_array() || d.size() != 4) throw ConfigError("config: domain must be [x_min, x_max, y_min, y_max]");
    c.model.domain = {d[0].get<double>(), d[1].get<double>(), d[2].get<double>(), d[3].get<double>()};
  }
  c.model.elements_per_dir = static_cast<int>(integer(model, "elements_per_dir", 64));
  c.model.quad_order = static_cast<int>(integer(model, "quad_order", 4));

  if (!doc.contains("component") || !doc["component"].is_array()) {
    throw ConfigError("config: at least one [[component]] table is required");
  }
  for (const auto& cj : doc["component"]) {
    ComponentSpec cs;
    cs.mass = num(cj, "mass", 1.0);
    cs.omega = num(cj, "omega", 0.0);
    cs.margin = num(cj, "margin", 0.05);
    if (cj.contains("potential")) {
      const auto& v = cj["potential"];
      if (!v.is_object()) throw ConfigError("config: potential must be a table");
      for (const auto& [key, _] : v.items()) {
        static const char* known[] = {"quad_x", "quad_y", "sin_x", "wave_x", "sin_y", "wave_y"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
          throw ConfigError("config: unknown potential coefficient '" + key + "'");
        }
      }
      cs.potential = {num(v, "quad_x", 0.0), num(v, "quad_y", 0.0), num(v, "sin_x", 0.0),
                      num(v, "wave_x", 0.0), num(v, "sin_y", 0.0),  num(v, "wave_y", 0.0)};
    }
    c.model.components.push_back(cs);
  }
  const int p = c.model.p();
  c.model.interaction = Eigen::MatrixXd::Zero(p, p);
  if (!model.contains("interaction")) throw ConfigError("config: missing interaction matrix");
  const auto& k = model["interaction"];
  if (!k.is_array() || static_cast<int>(k.size()) != p) {
    throw ConfigError("config: interaction must be a " + std::to_string(p) + "x" + std::to_string(p) + " array");
  }
  for (int i = 0; i < p; ++i) {
    if (!k[i].is_array() || static_cast<int>(k[i].size()) != p) {
      throw ConfigError("config: interaction row " + std::to_string(i + 1) + " has the wrong length");
    }
    for (int j = 0; j < p; ++j) c.model.interaction(i, j) = k[i][j].get<double>();
  }

  if (doc.contains("run")) {
    const json& r = doc["run"];
    c.run.method = parse_method(text(r, "method", "earg"));
    c.run.omega = num(r, "omega", c.run.omega);
    c.run.step = parse_step_rule(text(r, "step", "fixed:1"));
    c.run.stop_residual = num(r, "tol", c.run.stop_residual);
    c.run.tol_cg = num(r, "tol_cg", c.run.tol_cg);
    c.run.cg_floor = num(r, "cg_floor", c.run.cg_floor);
    c.run.max_iters = static_cast<int>(integer(r, "max_iters", c.run.max_iters));
    if (r.contains("warm_start")) c.run.warm_start = r["warm_start"].get<bool>();
    c.run.warm_start_residual = num(r, "warm_start_residual", c.run.warm_start_residual);
    c.run.max_warm_iters = static_cast<int>(integer(r, "max_warm_iters", c.run.max_warm_iters));
    c.run.record_every = static_cast<int>(integer(r, "record_every", c.run.record_every));
    c.run.fallback = parse_fallback(text(r, "fallback", "ea_step"));
    c.run.preconditioner = parse_source(text(r, "preconditioner", "linear_part"));
  }
  c.model.validate();
  return c;
}

ConfigFile parse_config(const std::string& toml_text) { return config_from_json(toml::parse(toml_text)); }

std::string emit_config(const ConfigFile& c) { return toml::emit(config_to_json(c)); }

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_config(const ConfigFile& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << emit_config(c);
}

bool equivalent(const ConfigFile& a, const ConfigFile& b) {
  return config_to_json(a) == config_to_json(b);
}

ConfigFile preset(const std::string& name) {
  ConfigFile c;
  c.name = name;
  auto& m = c.model;
  m.domain = {-10.0, 10.0, -10.0, 10.0};
  m.elements_per_dir = 64;
  m.quad_order = 4;
  auto harmonic = [](double mass, double omega, double qx, double qy) {
    ComponentSpec cs;
    cs.mass = mass;
    cs.omega = omega;
    cs.potential.quad_x = qx;
    cs.potential.quad_y = qy;
    return cs;
  };
  if (name == "model1" || name == "model2") {
    // 3/4 ((0.8x)^2 + (1.2y)^2) and 1/2 ((1.2x)^2 + (0.9y)^2)
    m.components = {harmonic(2.0, -1.0, 0.75 * 0.64, 0.75 * 1.44), harmonic(1.0, -1.2, 0.5 * 1.44, 0.5 * 0.81)};
    const double off = name == "model1" ? 20.0 : 60.0;
    m.interaction.resize(2, 2);
    m.interaction << 120.0, off, off, 100.0;
    c.run.tol_cg = 1e-8;
  } else if (name == "model3") {
    ComponentSpec third = harmonic(3.0, -1.2, 0.5, 0.5);
    third.potential.sin_x = 1.0;
    third.potential.wave_x = 1.0;
    third.potential.sin_y = 0.5;
    third.potential.wave_y = 1.0;
    m.components = {harmonic(2.0, -1.0, 0.5 * 0.81, 0.5 * 1.21), harmonic(1.0, -1.1, 0.5 * 1.21, 0.5 * 0.81), third};
    m.interaction.resize(3, 3);
    m.interaction << 100.0, 40.0, 50.0, 40.0, 125.0, 60.0, 50.0, 60.0, 150.0;
    c.run.tol_cg = 1e-1;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected model1, model2 or model3)");
  }
  m.validate();
  return c;
}

std::vector<std::string> preset_names() { return {"model1", "model2", "model3"}; }

}  // namespace gperot
