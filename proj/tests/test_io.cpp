#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rrm/config.hpp"
#include "rrm/errors.hpp"
#include "rrm/io.hpp"
#include "rrm/trainer.hpp"

using namespace rrm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("rrm_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny_run_config() {
  RunConfig cfg;
  cfg.seed = 11;
  cfg.geometry.num_users = 3;
  cfg.train.train_size = 4;
  cfg.train.test_size = 2;
  cfg.train.epochs = 15;
  cfg.train.batch_size = 4;
  cfg.train.horizon = 10;
  cfg.train.window_len = 5;
  cfg.train.tail_windows = 2;
  cfg.train.history_epochs = 5;
  cfg.train.dist_update_start = 5;
  cfg.train.dist_update_end = 10;
  cfg.train.hidden_dims = {6, 6};
  cfg.train.regressor_epochs = 5;
  cfg.train.f_min = 0.4;
  cfg.train.seed = cfg.seed;
  cfg.exec.horizon = 20;
  cfg.exec.window_len = 5;
  cfg.exec.f_min = 0.4;
  return cfg;
}

}  // namespace

TEST_CASE("dataset generation writes files, a manifest, and replays as a no-op") {
  const RunConfig cfg = tiny_run_config();
  const fs::path dir = fresh_dir("dataset");

  CHECK(generate_dataset(cfg, dir.string()));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "train_0000.json"));
  CHECK(fs::exists(dir / "train_0003.json"));
  CHECK(fs::exists(dir / "test_0001.json"));

  const std::string before = slurp(dir / "train_0002.json");
  CHECK(!generate_dataset(cfg, dir.string()));  // manifest replay: no-op
  CHECK(slurp(dir / "train_0002.json") == before);

  const auto train = load_dataset(dir.string(), "train");
  const auto test = load_dataset(dir.string(), "test");
  CHECK(train.size() == 4);
  CHECK(test.size() == 2);
  CHECK(train[0].size() == 3);

  // a different seed must refuse to overwrite the directory
  RunConfig other = cfg;
  other.seed = 12;
  CHECK_THROWS_AS(generate_dataset(other, dir.string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("non-empty directories without a manifest are refused") {
  const fs::path dir = fresh_dir("dirty");
  std::ofstream(dir / "stray.txt") << "not a dataset\n";
  CHECK_THROWS_AS(generate_dataset(tiny_run_config(), dir.string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("realization JSON round-trips bit-exactly") {
  GeometryConfig geo;
  geo.num_users = 4;
  geo.seed = 31;
  const NetworkRealization real = generate_realization(geo);
  const fs::path dir = fresh_dir("real");
  const std::string path = (dir / "r.json").string();
  save_realization_json(real, path);
  const NetworkRealization loaded = load_realization_json(path);
  CHECK(loaded.seed == real.seed);
  CHECK(loaded.tx_positions == real.tx_positions);
  CHECK(loaded.rx_positions == real.rx_positions);
  CHECK(loaded.long_term_gain == real.long_term_gain);
  fs::remove_all(dir);
}

TEST_CASE("model JSON round-trips bit-exactly") {
  PolicyNet policy;
  policy.net = Mpnn::create({1, 5, 5, 1}, 77);
  policy.norm = GraphNorm{-7.3, 3.0};
  policy.p_max_watts = 0.01;
  policy.mu_scale = 2.0;
  const PolicyNet loaded = policy_from_json(policy_to_json(policy));
  CHECK(loaded.net.flatten() == policy.net.flatten());
  CHECK(loaded.norm.ref_gain_log10 == policy.norm.ref_gain_log10);
  CHECK(loaded.p_max_watts == policy.p_max_watts);
  CHECK(loaded.mu_scale == policy.mu_scale);

  RegressorNet reg;
  reg.net = Mpnn::create({1, 4, 1}, 78);
  reg.norm = GraphNorm{-6.0, 2.5};
  const RegressorNet rloaded = regressor_from_json(regressor_to_json(reg));
  CHECK(rloaded.net.flatten() == reg.net.flatten());
  CHECK(rloaded.norm.scale_decades == reg.norm.scale_decades);
}

TEST_CASE("resumed training reproduces the uninterrupted run bit-exactly") {
  const RunConfig run = tiny_run_config();
  const fs::path dir = fresh_dir("resume");
  generate_dataset(run, dir.string());
  const auto dataset = load_dataset(dir.string(), "train");

  // reference: one uninterrupted run
  Trainer full(run.train, dataset);
  std::vector<TrainLogRow> full_log;
  const TrainResult ref = full.run([&](const TrainLogRow& row) { full_log.push_back(row); });

  // interrupted run: stop after 7 epochs, checkpoint, reload, finish
  Trainer first(run.train, dataset);
  std::vector<TrainLogRow> log;
  for (int e = 0; e < 7; ++e) log.push_back(first.train_epoch().log);
  const std::string ckpt = (dir / "checkpoint.json").string();
  save_checkpoint(first, log, ckpt);

  Trainer second(run.train, dataset);
  std::vector<TrainLogRow> restored_log;
  load_checkpoint(second, restored_log, ckpt);
  CHECK(second.epoch() == 7);
  REQUIRE(restored_log.size() == 7);
  const TrainResult resumed = second.run();

  CHECK(resumed.policy.net.flatten() == ref.policy.net.flatten());
  CHECK(resumed.regressor.net.flatten() == ref.regressor.net.flatten());
  REQUIRE(resumed.regressor_targets.size() == ref.regressor_targets.size());
  for (std::size_t i = 0; i < ref.regressor_targets.size(); ++i)
    CHECK(resumed.regressor_targets[i] == ref.regressor_targets[i]);

  // logs: first 7 rows from the checkpoint + the rest from the resumed run
  std::vector<TrainLogRow> merged = restored_log;
  merged.insert(merged.end(), resumed.log.begin(), resumed.log.end());
  REQUIRE(merged.size() == full_log.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    CHECK(merged[i].epoch == full_log[i].epoch);
    CHECK(merged[i].mean_lagrangian == full_log[i].mean_lagrangian);
    CHECK(merged[i].grad_norm == full_log[i].grad_norm);
  }
  fs::remove_all(dir);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.6789, -2.5e17}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("metrics CSV round-trips") {
  const fs::path dir = fresh_dir("csv");
  const std::string path = (dir / "metrics.csv").string();
  std::vector<MetricsRow> rows = {{"fr", 6, 0.4, 2.5, 0.1, 0.3, 0.0},
                                  {"state-aug", 6, 0.4, 2.1, 0.45, 0.5, 120.0}};
  write_metrics_csv(rows, path);
  const auto loaded = read_metrics_csv(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].method == "fr");
  CHECK(loaded[1].method == "state-aug");
  CHECK(loaded[1].min == rows[1].min);
  CHECK(loaded[1].transient_length == rows[1].transient_length);
  fs::remove_all(dir);
}

TEST_CASE("evolution CSV round-trips") {
  const fs::path dir = fresh_dir("evo");
  const std::string path = (dir / "evolution.csv").string();
  std::vector<EvolutionRow> rows = {{"fr", 10, 2.0, 0.2, 0.4}, {"fr", 20, 2.1, 0.25, 0.45}};
  write_evolution_csv(rows, path);
  const auto loaded = read_evolution_csv(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[1].t == 20);
  CHECK(loaded[1].p5 == rows[1].p5);
  fs::remove_all(dir);
}

TEST_CASE("SVG chart places the data and legend") {
  const fs::path dir = fresh_dir("svg");
  const std::string path = (dir / "chart.svg").string();
  SvgSeries series{"min-rate", {0.0, 10.0}, {0.0, 1.0}};
  write_svg_chart(path, "test", "t", "rate", {series});
  const std::string svg = slurp(path);
  // chart box: x in [70, 590], y in [50, 425]; endpoints map to the corners
  CHECK(svg.find("70.00,425.00") != std::string::npos);
  CHECK(svg.find("590.00,50.00") != std::string::npos);
  CHECK(svg.find("class=\"legend\">min-rate</text>") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("SVG writer rejects empty input") {
  const fs::path dir = fresh_dir("svg_bad");
  CHECK_THROWS_AS(write_svg_chart((dir / "x.svg").string(), "t", "x", "y", {}), StateError);
  SvgSeries empty{"e", {}, {}};
  CHECK_THROWS_AS(write_svg_chart((dir / "x.svg").string(), "t", "x", "y", {empty}),
                  StateError);
  fs::remove_all(dir);
}

TEST_CASE("run config JSON carries overrides and derived values") {
  RunConfig cfg = tiny_run_config();
  const nlohmann::json j = cfg.to_json();
  CHECK(j.at("seed").get<std::uint64_t>() == 11);
  CHECK(j.at("geometry").at("num_users").get<int>() == 3);
  CHECK(j.at("geometry").contains("area_radius"));

  const RunConfig loaded = RunConfig::from_json(j);
  CHECK(loaded.seed == cfg.seed);
  CHECK(loaded.train.epochs == cfg.train.epochs);
  CHECK(loaded.exec.horizon == cfg.exec.horizon);
  CHECK(loaded.geometry.num_users == cfg.geometry.num_users);
}

TEST_CASE("config loader reports malformed files as config errors") {
  const fs::path dir = fresh_dir("cfg");
  const std::string path = (dir / "bad.json").string();
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(RunConfig::load(path), ConfigError);
  CHECK_THROWS_AS(RunConfig::load((dir / "missing.json").string()), ConfigError);
  fs::remove_all(dir);
}
