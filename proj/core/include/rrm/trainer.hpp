#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "rrm/channel.hpp"
#include "rrm/dual.hpp"
#include "rrm/gnn.hpp"
#include "rrm/rng.hpp"

namespace rrm {

struct TrainConfig {
  int epochs = 150;          // N
  int batch_size = 128;      // B
  int horizon = 200;         // T
  int window_len = 5;        // T0
  int tail_windows = 5;      // K0: trailing dual iterates kept per episode
  int history_epochs = 10;   // N0: epochs averaged for the dual distribution
  int dist_update_start = 15;  // N_start
  int dist_update_end = 60;    // N_end
  double lr_policy = -1.0;     // eta_phi; negative means the 0.1 / m default
  double lr_regressor = 1e-3;  // eta_psi
  double lr_dual = 2.0;        // eta_mu
  int regressor_epochs = 50;   // N_psi
  double f_min = 0.5;          // bits/s/Hz
  double p_max_dbm = 10.0;
  double noise_dbm = -104.0;
  int train_size = 256;
  int test_size = 128;
  std::uint64_t seed = 1;
  std::vector<int> hidden_dims = {64, 64};
  double mu_scale = 1.0;
  double edge_scale_decades = 3.0;
  bool unit_fading = false;            // time-invariant channel (test/ablation hook)
  bool adam = false;                   // adaptive-moment optimizer instead of plain ascent
  bool self_consistent_rollout = false;  // background dynamics drive the policy input
  bool pinned_dual_sampling = false;     // sample mu_bar by network index, not uniformly
  int checkpoint_interval = 0;           // epochs between checkpoints; 0 disables

  double lr_policy_effective(int num_users) const {
    return lr_policy >= 0.0 ? lr_policy : 0.1 / static_cast<double>(num_users);
  }
  void validate() const;
};

// Sampling distribution for the dual-variable policy inputs: U(0,1)^m
// initially, later the empirical multiset of trajectory averages.
struct DualDistribution {
  enum class Mode { kInitial, kEmpirical };
  Mode mode = Mode::kInitial;
  int num_users = 0;
  std::vector<Eigen::VectorXd> support;  // empirical mode only

  Eigen::VectorXd sample(Rng& rng) const;
  // Test/ablation hook: the multiset entry for a fixed index.
  const Eigen::VectorXd& support_at(std::size_t idx) const;
};

// Ring buffer over the last N0 epochs of per-network trailing dual
// iterates (the last K0 iterates of each episode).
class DualTrajectoryBuffer {
 public:
  DualTrajectoryBuffer() = default;
  DualTrajectoryBuffer(int capacity_epochs, int num_networks)
      : capacity_(capacity_epochs), num_networks_(num_networks) {}

  // tails[b] holds the K0 trailing iterates of network b's episode.
  void push_epoch(std::vector<std::vector<Eigen::VectorXd>> tails);
  bool full() const { return static_cast<int>(epochs_.size()) == capacity_; }
  int size() const { return static_cast<int>(epochs_.size()); }
  int capacity() const { return capacity_; }
  int num_networks() const { return num_networks_; }

  // mu_bar per network: mean over all stored epochs and trailing iterates.
  std::vector<Eigen::VectorXd> averages() const;

  const std::deque<std::vector<std::vector<Eigen::VectorXd>>>& raw() const { return epochs_; }
  void restore(std::deque<std::vector<std::vector<Eigen::VectorXd>>> epochs);

 private:
  int capacity_ = 0;
  int num_networks_ = 0;
  std::deque<std::vector<std::vector<Eigen::VectorXd>>> epochs_;
};

Eigen::VectorXd sample_duals(const DualDistribution& dist, Rng& rng);

// Empirical distribution over the buffer's per-network trajectory
// averages; valid only inside the update window with a full buffer.
DualDistribution update_dual_distribution(const DualTrajectoryBuffer& buffer, int epoch,
                                          const TrainConfig& cfg);

struct TrainLogRow {
  int epoch = 0;
  double mean_lagrangian = 0.0;
  double mean_utility = 0.0;
  double mean_penalty = 0.0;
  double mu_bar_mean = 0.0;  // NaN until the buffer holds N0 epochs
  double mu_bar_min = 0.0;
  double grad_norm = 0.0;
};

struct EpochResult {
  std::vector<std::vector<Eigen::VectorXd>> dual_tails;  // per network, K0 iterates
  TrainLogRow log;
};

struct RegressorLogRow {
  int epoch = 0;
  double mse = 0.0;
  double lr = 0.0;  // after any backoff
};

struct TrainResult {
  PolicyNet policy;
  RegressorNet regressor;
  std::vector<TrainLogRow> log;
  std::vector<RegressorLogRow> regressor_log;
  DualDistribution distribution;
  std::vector<Eigen::VectorXd> regressor_targets;  // mu_bar at epoch N_end + N0
};

// Full training state, exposed so runs can checkpoint and resume.
class Trainer {
 public:
  Trainer(TrainConfig cfg, std::vector<NetworkRealization> dataset);

  // Runs one epoch (index taken from internal counter): samples duals,
  // rolls out every network in batches, applies the gradient-ascent
  // update per batch, and records the background dual trajectories.
  EpochResult train_epoch();

  // Runs all remaining epochs and the regressor fit; returns the result.
  TrainResult run(const std::function<void(const TrainLogRow&)>& on_epoch = {});

  // Fits the dual regressor to (long-term gain, mu_bar) pairs.
  std::vector<RegressorLogRow> fit_regressor(const std::vector<Eigen::VectorXd>& targets);

  const PolicyNet& policy() const { return policy_; }
  PolicyNet& policy() { return policy_; }
  RegressorNet& regressor() { return regressor_; }
  const DualDistribution& distribution() const { return dist_; }
  DualDistribution& distribution() { return dist_; }
  DualTrajectoryBuffer& buffer() { return buffer_; }
  int epoch() const { return epoch_; }
  void set_epoch(int epoch) { epoch_ = epoch; }
  const TrainConfig& config() const { return cfg_; }
  const std::vector<NetworkRealization>& dataset() const { return dataset_; }
  std::vector<Eigen::VectorXd>& regressor_targets() { return regressor_targets_; }

  // Adam state accessors for checkpointing (empty when disabled or unused).
  Eigen::VectorXd& adam_m() { return adam_m_; }
  Eigen::VectorXd& adam_v() { return adam_v_; }
  long& adam_steps() { return adam_steps_; }

 private:
  void apply_update(const Mpnn& batch_grad_sum, int batch_count, TrainLogRow& log);

  TrainConfig cfg_;
  std::vector<NetworkRealization> dataset_;
  PolicyNet policy_;
  RegressorNet regressor_;
  DualDistribution dist_;
  DualDistribution frozen_dist_;  // p_{mu, N_end}
  DualTrajectoryBuffer buffer_;
  std::vector<Eigen::VectorXd> regressor_targets_;
  int epoch_ = 0;
  Eigen::VectorXd adam_m_, adam_v_;
  long adam_steps_ = 0;
};

// Convenience wrapper: construct a Trainer and run it to completion.
TrainResult train(const TrainConfig& cfg, const std::vector<NetworkRealization>& dataset,
                  const std::function<void(const TrainLogRow&)>& on_epoch = {});

}  // namespace rrm
