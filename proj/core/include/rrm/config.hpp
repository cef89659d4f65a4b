#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "rrm/baselines.hpp"
#include "rrm/channel.hpp"
#include "rrm/executor.hpp"
#include "rrm/trainer.hpp"

namespace rrm {

// Everything one run needs, loadable from a single JSON file. All
// randomness in a run flows from `seed` via documented substream
// derivation; per-section seeds are derived, never read from the file.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  GeometryConfig geometry;
  TrainConfig train;
  ExecutionConfig exec;
  ITLinQConfig itlinq;
  double burn_in_fraction = 0.25;  // feasibility reporting burn-in
  int evolution_stride = 10;       // evolution-curve sampling stride
  bool itlinq_per_step = false;    // reschedule every step instead of once

  void validate() const;
  nlohmann::json to_json() const;  // fully resolved (provenance copy)
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
};

}  // namespace rrm
