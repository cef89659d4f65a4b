#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rrm/baselines.hpp"
#include "rrm/config.hpp"
#include "rrm/errors.hpp"
#include "rrm/executor.hpp"
#include "rrm/io.hpp"
#include "rrm/metrics.hpp"
#include "rrm/rate.hpp"
#include "rrm/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
};

rrm::RunConfig load_config(const CommonArgs& args) {
  rrm::RunConfig cfg = rrm::RunConfig::load(args.config_path);
  if (args.seed_override) {
    cfg.seed = *args.seed_override;
    cfg.train.seed = *args.seed_override;
  }
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  return cfg;
}

void write_resolved_config(const rrm::RunConfig& cfg, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / "config.json");
  if (!out) throw rrm::StateError("cannot write resolved config in " + dir);
  out << cfg.to_json().dump(2) << '\n';
}

int cmd_generate(const CommonArgs& args, const std::string& dataset_dir) {
  const rrm::RunConfig cfg = load_config(args);
  const std::string dir = dataset_dir.empty() ? cfg.out_dir : dataset_dir;
  const bool wrote = rrm::generate_dataset(cfg, dir);
  if (wrote) {
    write_resolved_config(cfg, dir);
    std::cout << "generated " << cfg.train.train_size << " train + " << cfg.train.test_size
              << " test realizations in " << dir << "\n";
  } else {
    std::cout << "dataset in " << dir << " already matches this config; nothing to do\n";
  }
  return rrm::kExitOk;
}

int cmd_train(const CommonArgs& args, const std::string& dataset_dir,
              const std::string& resume_path) {
  rrm::RunConfig cfg = load_config(args);
  const auto dataset = rrm::load_dataset(dataset_dir, "train");
  rrm::Trainer trainer(cfg.train, dataset);

  std::vector<rrm::TrainLogRow> log;
  if (!resume_path.empty()) rrm::load_checkpoint(trainer, log, resume_path);

  fs::create_directories(cfg.out_dir);
  write_resolved_config(cfg, cfg.out_dir);
  const std::string checkpoint_path = (fs::path(cfg.out_dir) / "checkpoint.json").string();

  const int interval = cfg.train.checkpoint_interval;
  const auto result = trainer.run([&](const rrm::TrainLogRow& row) {
    log.push_back(row);
    if (interval > 0 && trainer.epoch() % interval == 0 &&
        trainer.epoch() < cfg.train.epochs) {
      rrm::save_checkpoint(trainer, log, checkpoint_path);
    }
    std::cout << "epoch " << row.epoch << " L=" << row.mean_lagrangian
              << " U=" << row.mean_utility << " penalty=" << row.mean_penalty << "\n";
  });

  rrm::save_checkpoint(trainer, log, checkpoint_path);
  rrm::write_train_log_csv(log, (fs::path(cfg.out_dir) / "trainlog.csv").string());
  rrm::write_regressor_log_csv(result.regressor_log,
                               (fs::path(cfg.out_dir) / "regressor_log.csv").string());
  std::cout << "checkpoint written to " << checkpoint_path << "\n";
  return rrm::kExitOk;
}

const std::vector<std::string> kAllMethods = {"state-aug", "state-aug-ablated", "fr",
                                              "itlinq"};

// Rollout with externally chosen powers (fixed or rescheduled per step).
rrm::EpisodeTrace baseline_rollout(const rrm::NetworkRealization& real,
                                   const rrm::RunConfig& cfg, bool itlinq, bool per_step,
                                   std::uint64_t seed) {
  const double p_max = rrm::dbm_to_watts(cfg.train.p_max_dbm);
  const double noise = rrm::dbm_to_watts(cfg.exec.noise_dbm);
  const int m = real.size();
  const auto states =
      rrm::sample_fading_sequence(real, cfg.exec.horizon, seed, cfg.exec.unit_fading);

  Eigen::VectorXd p = itlinq
                          ? rrm::itlinq_schedule(real.long_term_gain, noise, p_max, cfg.itlinq)
                          : rrm::full_reuse(m, p_max);

  rrm::EpisodeTrace trace;
  trace.window_len = cfg.exec.window_len;
  trace.powers.resize(cfg.exec.horizon, m);
  trace.rates.resize(cfg.exec.horizon, m);
  const int num_windows = cfg.exec.horizon / cfg.exec.window_len;
  trace.dual_iterates = Eigen::MatrixXd::Zero(num_windows + 1, m);
  trace.window_slack.resize(num_windows, m);

  for (int t = 0; t < cfg.exec.horizon; ++t) {
    const auto& state = states[static_cast<std::size_t>(t)];
    if (itlinq && per_step) p = rrm::itlinq_schedule(state.gain, noise, p_max, cfg.itlinq);
    trace.powers.row(t) = p.transpose();
    trace.rates.row(t) = rrm::rates(state.gain, p, noise).transpose();
  }
  for (int k = 0; k < num_windows; ++k) {
    const Eigen::VectorXd window_avg =
        trace.rates.middleRows(k * cfg.exec.window_len, cfg.exec.window_len)
            .colwise()
            .mean()
            .transpose();
    trace.window_slack.row(k) =
        rrm::constraint_slack(window_avg, cfg.exec.f_min).transpose();
  }
  const Eigen::VectorXd ergodic = trace.rates.colwise().mean().transpose();
  trace.utility_term = rrm::utility(ergodic);
  trace.penalty_term = 0.0;
  trace.lagrangian = trace.utility_term;
  return trace;
}

int cmd_eval(const CommonArgs& args, const std::string& dataset_dir,
             const std::string& checkpoint_path, std::vector<std::string> methods) {
  rrm::RunConfig cfg = load_config(args);
  const auto test_set = rrm::load_dataset(dataset_dir, "test");
  if (test_set.empty()) throw rrm::StateError("eval: test split is empty");

  if (methods.empty()) methods = kAllMethods;
  for (const auto& method : methods) {
    if (std::find(kAllMethods.begin(), kAllMethods.end(), method) == kAllMethods.end())
      throw rrm::ConfigError("unknown method '" + method + "'");
  }
  const bool needs_model =
      std::any_of(methods.begin(), methods.end(),
                  [](const std::string& s) { return s.rfind("state-aug", 0) == 0; });

  rrm::PolicyNet policy;
  rrm::RegressorNet regressor;
  if (needs_model) {
    if (checkpoint_path.empty())
      throw rrm::ConfigError("eval: state-aug methods require --checkpoint");
    const std::ifstream probe(checkpoint_path);
    if (!probe) throw rrm::StateError("eval: cannot open checkpoint " + checkpoint_path);
    std::ifstream in(checkpoint_path);
    json j;
    in >> j;
    policy = rrm::policy_from_json(j.at("policy"));
    regressor = rrm::regressor_from_json(j.at("regressor"));
  }

  fs::create_directories(cfg.out_dir);
  write_resolved_config(cfg, cfg.out_dir);

  const int burn_in =
      static_cast<int>(cfg.burn_in_fraction * static_cast<double>(cfg.exec.horizon));
  std::vector<rrm::MetricsRow> metrics_rows;
  std::vector<rrm::EvolutionRow> evolution_rows;
  json summary;

  for (const auto& method : methods) {
    std::vector<Eigen::MatrixXd> rate_traces;
    std::vector<double> pool;
    std::vector<double> transients;
    json per_network = json::array();

    for (std::size_t idx = 0; idx < test_set.size(); ++idx) {
      const std::uint64_t run_seed =
          rrm::Rng::substream(cfg.seed, {200, static_cast<std::uint64_t>(idx)}).next_u64();
      rrm::EpisodeTrace trace;
      if (method == "state-aug" || method == "state-aug-ablated") {
        rrm::ExecutionConfig exec = cfg.exec;
        if (method == "state-aug-ablated") exec.init_mode = rrm::DualInitMode::kUniform;
        const rrm::RegressorNet* reg =
            exec.init_mode == rrm::DualInitMode::kRegressor ? &regressor : nullptr;
        trace = rrm::execute(policy, reg, test_set[idx], exec, run_seed);
      } else {
        trace = baseline_rollout(test_set[idx], cfg, method == "itlinq",
                                 cfg.itlinq_per_step, run_seed);
      }

      const auto report = rrm::feasibility_report(trace, cfg.exec.f_min, burn_in);
      for (Eigen::Index i = 0; i < report.avg_rate.size(); ++i)
        pool.push_back(report.avg_rate(i));
      const int transient = rrm::transient_length(trace.rates);
      transients.push_back(static_cast<double>(transient));
      rate_traces.push_back(trace.rates);

      json net_entry = {{"network", idx},
                        {"transient_length", transient},
                        {"ergodic_rates", std::vector<double>(
                                              report.avg_rate.data(),
                                              report.avg_rate.data() + report.avg_rate.size())},
                        {"final_duals",
                         std::vector<double>(trace.dual_iterates.row(trace.num_windows()).data(),
                                             trace.dual_iterates.row(trace.num_windows()).data() +
                                                 trace.dual_iterates.cols())}};
      per_network.push_back(std::move(net_entry));

      char name[64];
      std::snprintf(name, sizeof(name), "trace_%s_%03zu.csv", method.c_str(), idx);
      std::ofstream trace_out(fs::path(cfg.out_dir) / name);
      trace.write_csv(trace_out);
    }

    const rrm::RateMetrics rm = rrm::rate_metrics(pool);
    std::vector<double> sorted_transients = transients;
    std::sort(sorted_transients.begin(), sorted_transients.end());
    const std::size_t n = sorted_transients.size();
    const double median_transient =
        (n % 2 == 1) ? sorted_transients[n / 2]
                     : 0.5 * (sorted_transients[n / 2 - 1] + sorted_transients[n / 2]);

    metrics_rows.push_back({method, test_set.front().size(), cfg.exec.f_min, rm.mean, rm.min,
                            rm.p5, median_transient});
    for (const auto& point : rrm::evolution_curves(rate_traces, cfg.evolution_stride)) {
      evolution_rows.push_back(
          {method, point.t, point.metrics.mean, point.metrics.min, point.metrics.p5});
    }
    summary[method] = per_network;
  }

  rrm::write_metrics_csv(metrics_rows, (fs::path(cfg.out_dir) / "metrics.csv").string());
  rrm::write_evolution_csv(evolution_rows,
                           (fs::path(cfg.out_dir) / "evolution.csv").string());
  std::ofstream summary_out(fs::path(cfg.out_dir) / "summary.json");
  summary_out << summary.dump(2) << '\n';
  std::cout << "metrics written to " << (fs::path(cfg.out_dir) / "metrics.csv").string()
            << "\n";
  return rrm::kExitOk;
}

int cmd_plot(const std::string& input_path, const std::string& out_dir) {
  const auto rows = rrm::read_evolution_csv(input_path);
  if (rows.empty()) throw rrm::StateError("plot: no data rows in " + input_path);
  fs::create_directories(out_dir);

  std::vector<std::string> methods;
  for (const auto& row : rows) {
    if (std::find(methods.begin(), methods.end(), row.method) == methods.end())
      methods.push_back(row.method);
  }

  struct Metric {
    const char* name;
    double rrm::EvolutionRow::*field;
  };
  const Metric metric_list[] = {{"mean", &rrm::EvolutionRow::mean},
                                {"min", &rrm::EvolutionRow::min},
                                {"p5", &rrm::EvolutionRow::p5}};
  for (const auto& metric : metric_list) {
    std::vector<rrm::SvgSeries> series;
    for (const auto& method : methods) {
      rrm::SvgSeries s;
      s.label = method;
      for (const auto& row : rows) {
        if (row.method != method) continue;
        s.x.push_back(static_cast<double>(row.t));
        s.y.push_back(row.*metric.field);
      }
      series.push_back(std::move(s));
    }
    const std::string path = (fs::path(out_dir) / (std::string(metric.name) + ".svg")).string();
    rrm::write_svg_chart(path, std::string(metric.name) + " rate vs time", "time step",
                         "bits/s/Hz", series);
  }
  std::cout << "plots written to " << out_dir << "\n";
  return rrm::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"state-augmented power-control toolkit"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string dataset_dir;
  std::string checkpoint_path;
  std::string resume_path;
  std::string plot_input;
  std::vector<std::string> methods;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", common.config_path, "run config JSON");
    if (need_config) opt->required();
    sub->add_option("--out", common.out_dir, "output directory (overrides config)");
    sub->add_option("--seed", common.seed_override, "root seed override");
  };

  auto* gen = app.add_subcommand("generate", "generate a dataset of network realizations");
  add_common(gen, true);
  gen->add_option("--dataset", dataset_dir, "dataset directory (defaults to --out)");

  auto* train = app.add_subcommand("train", "train the policy and dual regressor");
  add_common(train, true);
  train->add_option("--dataset", dataset_dir, "dataset directory")->required();
  train->add_option("--resume", resume_path, "checkpoint to resume from");

  auto* eval = app.add_subcommand("eval", "evaluate methods on the test split");
  add_common(eval, true);
  eval->add_option("--dataset", dataset_dir, "dataset directory")->required();
  eval->add_option("--checkpoint", checkpoint_path, "trained checkpoint JSON");
  eval->add_option("--method", methods,
                   "methods to evaluate (state-aug, state-aug-ablated, fr, itlinq); "
                   "default: all");

  auto* plot = app.add_subcommand("plot", "render SVG charts from an evolution CSV");
  plot->add_option("--input", plot_input, "evolution CSV from eval")->required();
  plot->add_option("--out", common.out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(common, dataset_dir);
    if (train->parsed()) return cmd_train(common, dataset_dir, resume_path);
    if (eval->parsed()) return cmd_eval(common, dataset_dir, checkpoint_path, methods);
    if (plot->parsed()) return cmd_plot(plot_input, common.out_dir);
  } catch (const rrm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return rrm::kExitConfig;
  } catch (const rrm::StateError& e) {
    std::cerr << "state error: " << e.what() << "\n";
    return rrm::kExitState;
  } catch (const rrm::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return rrm::kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rrm::kExitOk;
}
