#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

using doctest::String;
namespace fs = std::filesystem;

namespace {

const char* kCli = RRM_CLI_PATH;

int run(const std::string& command) {
  const int status = std::system((command + " > /dev/null 2>&1").c_str());
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path root;
  explicit Workspace(const std::string& tag) {
    root = fs::temp_directory_path() / ("rrm_cli_" + tag);
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
  std::string path(const std::string& name) const { return (root / name).string(); }
};

std::string write_tiny_config(const Workspace& ws) {
  const std::string path = ws.path("config.json");
  std::ofstream out(path);
  out << R"({
  "seed": 7,
  "geometry": {"num_users": 3},
  "train": {
    "epochs": 6,
    "batch_size": 4,
    "horizon": 10,
    "window_len": 5,
    "tail_windows": 2,
    "history_epochs": 1,
    "dist_update_start": 2,
    "dist_update_end": 3,
    "train_size": 4,
    "test_size": 2,
    "f_min": 0.4,
    "hidden_dims": [4, 4],
    "regressor_epochs": 5
  },
  "exec": {"horizon": 20},
  "evolution_stride": 5
})";
  return path;
}

}  // namespace

TEST_CASE("full pipeline: generate, train, eval, plot") {
  Workspace ws("pipeline");
  const std::string cfg = write_tiny_config(ws);
  const std::string cli = kCli;

  // generate
  CHECK(run(cli + " generate --config " + cfg + " --dataset " + ws.path("data")) == 0);
  CHECK(fs::exists(ws.root / "data" / "manifest.json"));
  CHECK(fs::exists(ws.root / "data" / "train_0003.json"));
  CHECK(fs::exists(ws.root / "data" / "test_0001.json"));
  // replay is a no-op success
  CHECK(run(cli + " generate --config " + cfg + " --dataset " + ws.path("data")) == 0);

  // train
  CHECK(run(cli + " train --config " + cfg + " --dataset " + ws.path("data") + " --out " +
            ws.path("run1")) == 0);
  CHECK(fs::exists(ws.root / "run1" / "checkpoint.json"));
  CHECK(fs::exists(ws.root / "run1" / "trainlog.csv"));
  CHECK(fs::exists(ws.root / "run1" / "regressor_log.csv"));
  CHECK(fs::exists(ws.root / "run1" / "config.json"));

  // retraining into a second directory is bit-identical
  CHECK(run(cli + " train --config " + cfg + " --dataset " + ws.path("data") + " --out " +
            ws.path("run2")) == 0);
  CHECK(slurp(ws.root / "run1" / "trainlog.csv") == slurp(ws.root / "run2" / "trainlog.csv"));
  CHECK(slurp(ws.root / "run1" / "checkpoint.json") ==
        slurp(ws.root / "run2" / "checkpoint.json"));

  // eval, all methods
  const std::string ckpt = ws.path("run1") + "/checkpoint.json";
  CHECK(run(cli + " eval --config " + cfg + " --dataset " + ws.path("data") +
            " --checkpoint " + ckpt + " --out " + ws.path("eval1")) == 0);
  CHECK(fs::exists(ws.root / "eval1" / "metrics.csv"));
  CHECK(fs::exists(ws.root / "eval1" / "evolution.csv"));
  CHECK(fs::exists(ws.root / "eval1" / "summary.json"));
  CHECK(fs::exists(ws.root / "eval1" / "trace_fr_000.csv"));
  CHECK(fs::exists(ws.root / "eval1" / "trace_state-aug_001.csv"));

  const std::string metrics = slurp(ws.root / "eval1" / "metrics.csv");
  CHECK(metrics.find("state-aug,") != std::string::npos);
  CHECK(metrics.find("state-aug-ablated,") != std::string::npos);
  CHECK(metrics.find("fr,") != std::string::npos);
  CHECK(metrics.find("itlinq,") != std::string::npos);

  // eval rerun is bit-identical
  CHECK(run(cli + " eval --config " + cfg + " --dataset " + ws.path("data") +
            " --checkpoint " + ckpt + " --out " + ws.path("eval2")) == 0);
  CHECK(metrics == slurp(ws.root / "eval2" / "metrics.csv"));
  CHECK(slurp(ws.root / "eval1" / "evolution.csv") ==
        slurp(ws.root / "eval2" / "evolution.csv"));

  // baselines alone need no checkpoint
  CHECK(run(cli + " eval --config " + cfg + " --dataset " + ws.path("data") +
            " --method fr --method itlinq --out " + ws.path("eval_fr")) == 0);
  const std::string fr_metrics = slurp(ws.root / "eval_fr" / "metrics.csv");
  CHECK(fr_metrics.find("fr,") != std::string::npos);
  CHECK(fr_metrics.find("state-aug") == std::string::npos);

  // plot
  CHECK(run(cli + " plot --input " + ws.path("eval1") + "/evolution.csv --out " +
            ws.path("plots")) == 0);
  CHECK(fs::exists(ws.root / "plots" / "mean.svg"));
  CHECK(fs::exists(ws.root / "plots" / "min.svg"));
  CHECK(fs::exists(ws.root / "plots" / "p5.svg"));
  const std::string svg = slurp(ws.root / "plots" / "min.svg");
  CHECK(svg.find("class=\"legend\">fr</text>") != std::string::npos);
  CHECK(svg.find("class=\"legend\">state-aug</text>") != std::string::npos);
}

TEST_CASE("error paths map to the documented exit codes") {
  Workspace ws("errors");
  const std::string cli = kCli;
  const std::string cfg = write_tiny_config(ws);

  // missing config file -> config error (2)
  CHECK(run(cli + " generate --config " + ws.path("nope.json")) == 2);

  // malformed config -> config error (2)
  std::ofstream(ws.path("bad.json")) << "{ broken";
  CHECK(run(cli + " generate --config " + ws.path("bad.json") + " --dataset " +
            ws.path("d")) == 2);

  // invalid cross-field values -> config error (2)
  std::ofstream(ws.path("invalid.json"))
      << R"({"train": {"horizon": 11, "window_len": 5}})";
  CHECK(run(cli + " generate --config " + ws.path("invalid.json") + " --dataset " +
            ws.path("d2")) == 2);

  // state-aug eval without a checkpoint -> config error (2)
  CHECK(run(cli + " generate --config " + cfg + " --dataset " + ws.path("data")) == 0);
  CHECK(run(cli + " eval --config " + cfg + " --dataset " + ws.path("data") +
            " --method state-aug --out " + ws.path("ev")) == 2);

  // unknown method -> config error (2)
  CHECK(run(cli + " eval --config " + cfg + " --dataset " + ws.path("data") +
            " --method wmmse --out " + ws.path("ev2")) == 2);

  // missing dataset -> state error (3)
  CHECK(run(cli + " train --config " + cfg + " --dataset " + ws.path("missing") +
            " --out " + ws.path("run")) == 3);

  // plot on a header-only CSV -> state error (3)
  std::ofstream(ws.path("empty.csv")) << "method,t,mean,min,p5\n";
  CHECK(run(cli + " plot --input " + ws.path("empty.csv") + " --out " + ws.path("p")) == 3);
}

TEST_CASE("seed override changes the dataset") {
  Workspace ws("seeds");
  const std::string cli = kCli;
  const std::string cfg = write_tiny_config(ws);
  CHECK(run(cli + " generate --config " + cfg + " --dataset " + ws.path("a")) == 0);
  CHECK(run(cli + " generate --config " + cfg + " --seed 8 --dataset " + ws.path("b")) == 0);
  CHECK(slurp(ws.root / "a" / "train_0000.json") != slurp(ws.root / "b" / "train_0000.json"));
  // and refuses to mix the two under one directory
  CHECK(run(cli + " generate --config " + cfg + " --seed 8 --dataset " + ws.path("a")) == 2);
}
