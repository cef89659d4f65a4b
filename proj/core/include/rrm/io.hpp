#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rrm/config.hpp"
#include "rrm/metrics.hpp"
#include "rrm/trainer.hpp"

namespace rrm {

// ---- dataset files ---------------------------------------------------

// Writes cfg.train.train_size + cfg.train.test_size realizations plus a
// manifest into dir. Re-running with an identical manifest is a no-op;
// a non-empty directory without a matching manifest is refused.
// Returns true when files were (re)written, false on the no-op path.
bool generate_dataset(const RunConfig& cfg, const std::string& dir);

std::vector<NetworkRealization> load_dataset(const std::string& dir,
                                             const std::string& split);  // "train"|"test"

void save_realization_json(const NetworkRealization& real, const std::string& path);
NetworkRealization load_realization_json(const std::string& path);

// ---- checkpoints -----------------------------------------------------

nlohmann::json policy_to_json(const PolicyNet& policy);
PolicyNet policy_from_json(const nlohmann::json& j);
nlohmann::json regressor_to_json(const RegressorNet& regressor);
RegressorNet regressor_from_json(const nlohmann::json& j);

// Full training state: models, dual distribution, trajectory buffer,
// optimizer state, epoch counter, and the log rows so far, so a resumed
// run reproduces the uninterrupted one bit-exactly.
void save_checkpoint(Trainer& trainer, const std::vector<TrainLogRow>& log,
                     const std::string& path);
void load_checkpoint(Trainer& trainer, std::vector<TrainLogRow>& log,
                     const std::string& path);

// ---- CSV -------------------------------------------------------------

std::string format_double(double v);  // %.17g, round-trip exact

void write_train_log_csv(const std::vector<TrainLogRow>& rows, const std::string& path);
void write_regressor_log_csv(const std::vector<RegressorLogRow>& rows,
                             const std::string& path);

struct MetricsRow {
  std::string method;
  int num_users = 0;
  double f_min = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double p5 = 0.0;
  double transient_length = 0.0;
};
void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

struct EvolutionRow {
  std::string method;
  int t = 0;
  double mean = 0.0;
  double min = 0.0;
  double p5 = 0.0;
};
void write_evolution_csv(const std::vector<EvolutionRow>& rows, const std::string& path);
std::vector<EvolutionRow> read_evolution_csv(const std::string& path);

// ---- SVG -------------------------------------------------------------

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal line chart: axes with tick labels, one polyline per series,
// and a legend naming exactly the series given.
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series);

}  // namespace rrm
