#include "rrm/config.hpp"

#include <fstream>

#include "rrm/errors.hpp"

namespace rrm {

namespace {

using nlohmann::json;

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string density_name(DensityMode mode) {
  return mode == DensityMode::kFixed ? "fixed" : "variable";
}

DensityMode density_from_name(const std::string& name) {
  if (name == "fixed") return DensityMode::kFixed;
  if (name == "variable") return DensityMode::kVariable;
  throw ConfigError("geometry.density must be 'fixed' or 'variable', got '" + name + "'");
}

std::string init_mode_name(DualInitMode mode) {
  switch (mode) {
    case DualInitMode::kRegressor: return "regressor";
    case DualInitMode::kZeros: return "zeros";
    case DualInitMode::kUniform: return "uniform";
  }
  return "regressor";
}

DualInitMode init_mode_from_name(const std::string& name) {
  if (name == "regressor") return DualInitMode::kRegressor;
  if (name == "zeros") return DualInitMode::kZeros;
  if (name == "uniform") return DualInitMode::kUniform;
  throw ConfigError("exec.init_mode must be regressor|zeros|uniform, got '" + name + "'");
}

}  // namespace

void RunConfig::validate() const {
  geometry.validate();
  train.validate();
  exec.validate();
  itlinq.validate();
  if (geometry.num_users != 0 && geometry.num_users < 1)
    throw ConfigError("geometry.num_users must be >= 1");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
    throw ConfigError("burn_in_fraction must be in [0, 1)");
  if (evolution_stride < 1) throw ConfigError("evolution_stride must be >= 1");
}

json RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["burn_in_fraction"] = burn_in_fraction;
  j["evolution_stride"] = evolution_stride;
  j["itlinq_per_step"] = itlinq_per_step;

  json g;
  g["num_users"] = geometry.num_users;
  g["density"] = density_name(geometry.density);
  g["area_radius"] = geometry.area_radius();  // derived, written for provenance
  g["rx_distance_min"] = geometry.rx_distance_min;
  g["rx_distance_max"] = geometry.rx_distance_max;
  g["shadowing_sigma_db"] = geometry.shadowing_sigma_db;
  g["pathloss"] = {{"ref_distance", geometry.pathloss.ref_distance},
                   {"ref_gain", geometry.pathloss.ref_gain},
                   {"exponent_near", geometry.pathloss.exponent_near},
                   {"exponent_far", geometry.pathloss.exponent_far},
                   {"break_distance", geometry.pathloss.break_distance}};
  j["geometry"] = g;

  json t;
  t["epochs"] = train.epochs;
  t["batch_size"] = train.batch_size;
  t["horizon"] = train.horizon;
  t["window_len"] = train.window_len;
  t["tail_windows"] = train.tail_windows;
  t["history_epochs"] = train.history_epochs;
  t["dist_update_start"] = train.dist_update_start;
  t["dist_update_end"] = train.dist_update_end;
  t["lr_policy"] = train.lr_policy;
  t["lr_regressor"] = train.lr_regressor;
  t["lr_dual"] = train.lr_dual;
  t["regressor_epochs"] = train.regressor_epochs;
  t["f_min"] = train.f_min;
  t["p_max_dbm"] = train.p_max_dbm;
  t["noise_dbm"] = train.noise_dbm;
  t["train_size"] = train.train_size;
  t["test_size"] = train.test_size;
  t["hidden_dims"] = train.hidden_dims;
  t["mu_scale"] = train.mu_scale;
  t["edge_scale_decades"] = train.edge_scale_decades;
  t["unit_fading"] = train.unit_fading;
  t["adam"] = train.adam;
  t["self_consistent_rollout"] = train.self_consistent_rollout;
  t["pinned_dual_sampling"] = train.pinned_dual_sampling;
  t["checkpoint_interval"] = train.checkpoint_interval;
  j["train"] = t;

  json e;
  e["horizon"] = exec.horizon;
  e["window_len"] = exec.window_len;
  e["lr_dual"] = exec.lr_dual;
  e["f_min"] = exec.f_min;
  e["noise_dbm"] = exec.noise_dbm;
  e["init_mode"] = init_mode_name(exec.init_mode);
  e["unit_fading"] = exec.unit_fading;
  j["exec"] = e;

  j["itlinq"] = {{"threshold_db", itlinq.threshold_db},
                 {"snr_exponent", itlinq.snr_exponent}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg;
  read_if(j, "seed", cfg.seed);
  read_if(j, "out_dir", cfg.out_dir);
  read_if(j, "burn_in_fraction", cfg.burn_in_fraction);
  read_if(j, "evolution_stride", cfg.evolution_stride);
  read_if(j, "itlinq_per_step", cfg.itlinq_per_step);

  if (j.contains("geometry")) {
    const json& g = j.at("geometry");
    read_if(g, "num_users", cfg.geometry.num_users);
    if (g.contains("density"))
      cfg.geometry.density = density_from_name(g.at("density").get<std::string>());
    read_if(g, "rx_distance_min", cfg.geometry.rx_distance_min);
    read_if(g, "rx_distance_max", cfg.geometry.rx_distance_max);
    read_if(g, "shadowing_sigma_db", cfg.geometry.shadowing_sigma_db);
    if (g.contains("pathloss")) {
      const json& p = g.at("pathloss");
      read_if(p, "ref_distance", cfg.geometry.pathloss.ref_distance);
      read_if(p, "ref_gain", cfg.geometry.pathloss.ref_gain);
      read_if(p, "exponent_near", cfg.geometry.pathloss.exponent_near);
      read_if(p, "exponent_far", cfg.geometry.pathloss.exponent_far);
      read_if(p, "break_distance", cfg.geometry.pathloss.break_distance);
    }
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    read_if(t, "epochs", cfg.train.epochs);
    read_if(t, "batch_size", cfg.train.batch_size);
    read_if(t, "horizon", cfg.train.horizon);
    read_if(t, "window_len", cfg.train.window_len);
    read_if(t, "tail_windows", cfg.train.tail_windows);
    read_if(t, "history_epochs", cfg.train.history_epochs);
    read_if(t, "dist_update_start", cfg.train.dist_update_start);
    read_if(t, "dist_update_end", cfg.train.dist_update_end);
    read_if(t, "lr_policy", cfg.train.lr_policy);
    read_if(t, "lr_regressor", cfg.train.lr_regressor);
    read_if(t, "lr_dual", cfg.train.lr_dual);
    read_if(t, "regressor_epochs", cfg.train.regressor_epochs);
    read_if(t, "f_min", cfg.train.f_min);
    read_if(t, "p_max_dbm", cfg.train.p_max_dbm);
    read_if(t, "noise_dbm", cfg.train.noise_dbm);
    read_if(t, "train_size", cfg.train.train_size);
    read_if(t, "test_size", cfg.train.test_size);
    read_if(t, "hidden_dims", cfg.train.hidden_dims);
    read_if(t, "mu_scale", cfg.train.mu_scale);
    read_if(t, "edge_scale_decades", cfg.train.edge_scale_decades);
    read_if(t, "unit_fading", cfg.train.unit_fading);
    read_if(t, "adam", cfg.train.adam);
    read_if(t, "self_consistent_rollout", cfg.train.self_consistent_rollout);
    read_if(t, "pinned_dual_sampling", cfg.train.pinned_dual_sampling);
    read_if(t, "checkpoint_interval", cfg.train.checkpoint_interval);
  }
  cfg.train.seed = cfg.seed;

  // Execution defaults follow the training block unless overridden.
  cfg.exec.f_min = cfg.train.f_min;
  cfg.exec.noise_dbm = cfg.train.noise_dbm;
  cfg.exec.window_len = cfg.train.window_len;
  cfg.exec.lr_dual = cfg.train.lr_dual;
  if (j.contains("exec")) {
    const json& e = j.at("exec");
    read_if(e, "horizon", cfg.exec.horizon);
    read_if(e, "window_len", cfg.exec.window_len);
    read_if(e, "lr_dual", cfg.exec.lr_dual);
    read_if(e, "f_min", cfg.exec.f_min);
    read_if(e, "noise_dbm", cfg.exec.noise_dbm);
    if (e.contains("init_mode"))
      cfg.exec.init_mode = init_mode_from_name(e.at("init_mode").get<std::string>());
    read_if(e, "unit_fading", cfg.exec.unit_fading);
  }

  if (j.contains("itlinq")) {
    const json& it = j.at("itlinq");
    read_if(it, "threshold_db", cfg.itlinq.threshold_db);
    read_if(it, "snr_exponent", cfg.itlinq.snr_exponent);
  }

  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError("config field error in " + path + ": " + e.what());
  }
}

}  // namespace rrm
