#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rrm/channel.hpp"
#include "rrm/dual.hpp"
#include "rrm/gnn.hpp"

namespace rrm {

enum class DualInitMode { kRegressor, kZeros, kUniform };

struct ExecutionConfig {
  int horizon = 2000;      // T_exec
  int window_len = 5;      // T0
  double lr_dual = 2.0;    // eta_mu
  double f_min = 0.5;
  double noise_dbm = -104.0;
  DualInitMode init_mode = DualInitMode::kRegressor;
  bool unit_fading = false;

  void validate() const;
};

// Online execution: initialize the duals (from the regressor by default),
// generate power decisions each step with the state-augmented policy, and
// run the dual dynamics every window_len steps.
EpisodeTrace execute(const PolicyNet& policy, const RegressorNet* regressor,
                     const NetworkRealization& realization, const ExecutionConfig& cfg,
                     std::uint64_t seed);

struct FeasibilityReport {
  Eigen::VectorXd avg_rate;     // per-user mean over [burn_in, T)
  Eigen::VectorXd margin;       // avg_rate - f_min
  std::vector<bool> feasible;   // margin >= 0
};

FeasibilityReport feasibility_report(const EpisodeTrace& trace, double f_min, int burn_in);

}  // namespace rrm
