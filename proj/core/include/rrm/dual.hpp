#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "rrm/channel.hpp"
#include "rrm/gnn.hpp"

namespace rrm {

// Projected subgradient step on the multipliers:
//   mu' = max(mu - eta * slack, 0) elementwise.
// Violated constraints (negative slack) raise their multiplier.
Eigen::VectorXd dual_update(const Eigen::VectorXd& mu, const Eigen::VectorXd& slack,
                            double eta);

struct LagrangianResult {
  double total = 0.0;
  double utility_term = 0.0;
  double penalty_term = 0.0;
  Eigen::VectorXd ergodic_rates;
};

// Episode Lagrangian L = U(xbar) + mu^T g(xbar) with mu held fixed across
// the whole episode and xbar the ergodic rate under p(H_t, mu). When grad
// is non-null, accumulates dL/d(policy weights) into it (reverse mode
// through the rate formula and the network).
LagrangianResult episode_lagrangian(const PolicyNet& policy, const Eigen::VectorXd& mu,
                                    const std::vector<NetworkState>& states, double f_min,
                                    double noise_watts, Mpnn* grad = nullptr);

// Constraint slack on the window-average rates under decisions
// p(H_t, mu) for the given (fixed) mu.
Eigen::VectorXd window_constraint(const PolicyNet& policy, const Eigen::VectorXd& mu,
                                  const std::vector<NetworkState>& window, double f_min,
                                  double noise_watts);

// Time-indexed record of one rollout: per-step powers and rates, plus the
// per-window dual iterates and slacks that drove them.
struct EpisodeTrace {
  int window_len = 1;                 // T0
  Eigen::MatrixXd powers;             // T x m, watts
  Eigen::MatrixXd rates;              // T x m, bits/s/Hz
  Eigen::MatrixXd dual_iterates;      // (K+1) x m; row k is mu entering window k
  Eigen::MatrixXd window_slack;       // K x m
  double lagrangian = 0.0;
  double utility_term = 0.0;
  double penalty_term = 0.0;

  int num_steps() const { return static_cast<int>(powers.rows()); }
  int num_users() const { return static_cast<int>(powers.cols()); }
  int num_windows() const { return static_cast<int>(window_slack.rows()); }

  // One row per step (t, powers, rates), then one row per window (k, mu, slack).
  void write_csv(std::ostream& out) const;
};

}  // namespace rrm
