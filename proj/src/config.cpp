#include "liqss/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace liqss {

namespace {

using nlohmann::json;

void check_known_keys(const json& obj, std::initializer_list<const char*> known,
                      const std::string& block) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown key \"" + key + "\" in " + block);
    }
  }
}

double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj[key].is_number()) {
    throw ConfigError(std::string("expected a number for \"") + key + "\"");
  }
  return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj[key].is_number_integer()) {
    throw ConfigError(std::string("expected an integer for \"") + key + "\"");
  }
  return obj[key].get<int>();
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) {
    throw ConfigError(std::string(what) + " must be positive");
  }
}

}  // namespace

ScenarioSpec RunConfig::scenario() const {
  ScenarioSpec s;
  s.params = machine;
  s.params.omega_b = grid.omega_b();
  s.grid = grid;
  s.torque = torque;
  s.quanta = quanta;
  s.t_end = t_end;
  s.euler_dt = euler_dt;
  s.resample_dt = resample_dt;
  s.torque_steps = torque_steps;
  return s;
}

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("config root must be an object");
  }
  check_known_keys(doc, {"machine", "grid", "torque", "quanta", "solver", "out_dir"}, "config root");

  RunConfig cfg;

  if (doc.contains("machine")) {
    const json& m = doc["machine"];
    check_known_keys(m,
                     {"R_s", "R_F", "R_D", "R_Q", "L_md", "L_mq", "L_L", "L_F", "L_D", "L_Q", "J",
                      "n", "T_rated"},
                     "machine block");
    auto& p = cfg.machine;
    p.R_s = get_number(m, "R_s", p.R_s);
    p.R_F = get_number(m, "R_F", p.R_F);
    p.R_D = get_number(m, "R_D", p.R_D);
    p.R_Q = get_number(m, "R_Q", p.R_Q);
    p.L_md = get_number(m, "L_md", p.L_md);
    p.L_mq = get_number(m, "L_mq", p.L_mq);
    p.L_L = get_number(m, "L_L", p.L_L);
    p.L_F = get_number(m, "L_F", p.L_F);
    p.L_D = get_number(m, "L_D", p.L_D);
    p.L_Q = get_number(m, "L_Q", p.L_Q);
    p.J = get_number(m, "J", p.J);
    p.n = get_int(m, "n", p.n);
    p.T_rated = get_number(m, "T_rated", p.T_rated);
    if (p.n < 1) {
      throw ConfigError("pole-pair count n must be at least 1");
    }
  }

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    check_known_keys(g, {"v_ll_rms", "f"}, "grid block");
    cfg.grid.v_ll_rms = get_number(g, "v_ll_rms", cfg.grid.v_ll_rms);
    cfg.grid.f = get_number(g, "f", cfg.grid.f);
    require_positive(cfg.grid.v_ll_rms, "grid.v_ll_rms");
    require_positive(cfg.grid.f, "grid.f");
  }
  cfg.machine.omega_b = cfg.grid.omega_b();

  if (doc.contains("torque")) {
    const json& t = doc["torque"];
    check_known_keys(t, {"t_start", "t_end", "fraction"}, "torque block");
    cfg.torque.t_start = get_number(t, "t_start", cfg.torque.t_start);
    cfg.torque.t_end = get_number(t, "t_end", cfg.torque.t_end);
    cfg.torque.fraction = get_number(t, "fraction", cfg.torque.fraction);
    if (!(cfg.torque.t_end > cfg.torque.t_start) || cfg.torque.t_start < 0.0 ||
        cfg.torque.fraction < 0.0) {
      throw ConfigError("torque profile must satisfy t_end > t_start >= 0 and fraction >= 0");
    }
  }

  if (doc.contains("quanta")) {
    const json& q = doc["quanta"];
    check_known_keys(q, {"flux_dq", "speed_dq", "angle_dq", "overrides"}, "quanta block");
    cfg.quanta.flux_dq = get_number(q, "flux_dq", cfg.quanta.flux_dq);
    cfg.quanta.speed_dq = get_number(q, "speed_dq", cfg.quanta.speed_dq);
    cfg.quanta.angle_dq = get_number(q, "angle_dq", cfg.quanta.angle_dq);
    require_positive(cfg.quanta.flux_dq, "quanta.flux_dq");
    require_positive(cfg.quanta.speed_dq, "quanta.speed_dq");
    require_positive(cfg.quanta.angle_dq, "quanta.angle_dq");
    if (q.contains("overrides")) {
      if (!q["overrides"].is_object()) {
        throw ConfigError("quanta.overrides must be an object");
      }
      for (const auto& [name, value] : q["overrides"].items()) {
        if (state_index(name) < 0) {
          throw ConfigError("quanta override names unknown state \"" + name + "\"");
        }
        if (!value.is_number() || !(value.get<double>() > 0.0)) {
          throw ConfigError("quanta override for \"" + name + "\" must be a positive number");
        }
        cfg.quanta.overrides[name] = value.get<double>();
      }
    }
  }

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    check_known_keys(s, {"t_end", "euler_dt", "resample_dt", "torque_steps"}, "solver block");
    cfg.t_end = get_number(s, "t_end", cfg.t_end);
    cfg.euler_dt = get_number(s, "euler_dt", cfg.euler_dt);
    cfg.resample_dt = get_number(s, "resample_dt", cfg.resample_dt);
    cfg.torque_steps = get_int(s, "torque_steps", cfg.torque_steps);
    require_positive(cfg.t_end, "solver.t_end");
    require_positive(cfg.euler_dt, "solver.euler_dt");
    require_positive(cfg.resample_dt, "solver.resample_dt");
    if (cfg.torque_steps < 1) {
      throw ConfigError("solver.torque_steps must be at least 1");
    }
  }

  if (doc.contains("out_dir")) {
    if (!doc["out_dir"].is_string()) {
      throw ConfigError("out_dir must be a string");
    }
    cfg.out_dir = doc["out_dir"].get<std::string>();
  }

  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const RunConfig& config) {
  json doc;
  const auto& p = config.machine;
  doc["machine"] = {{"R_s", p.R_s},   {"R_F", p.R_F},   {"R_D", p.R_D},   {"R_Q", p.R_Q},
                    {"L_md", p.L_md}, {"L_mq", p.L_mq}, {"L_L", p.L_L},   {"L_F", p.L_F},
                    {"L_D", p.L_D},   {"L_Q", p.L_Q},   {"J", p.J},       {"n", p.n},
                    {"T_rated", p.T_rated}};
  doc["grid"] = {{"v_ll_rms", config.grid.v_ll_rms}, {"f", config.grid.f}};
  doc["torque"] = {{"t_start", config.torque.t_start},
                   {"t_end", config.torque.t_end},
                   {"fraction", config.torque.fraction}};
  json quanta = {{"flux_dq", config.quanta.flux_dq},
                 {"speed_dq", config.quanta.speed_dq},
                 {"angle_dq", config.quanta.angle_dq}};
  if (!config.quanta.overrides.empty()) {
    json overrides = json::object();
    for (const auto& [name, value] : config.quanta.overrides) {
      overrides[name] = value;
    }
    quanta["overrides"] = overrides;
  }
  doc["quanta"] = quanta;
  doc["solver"] = {{"t_end", config.t_end},
                   {"euler_dt", config.euler_dt},
                   {"resample_dt", config.resample_dt},
                   {"torque_steps", config.torque_steps}};
  doc["out_dir"] = config.out_dir;
  return doc.dump(2) + "\n";
}

}  // namespace liqss
