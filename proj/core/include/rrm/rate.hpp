#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rrm {

// dBm -> linear watts (config values arrive in dBm, the engine works in watts).
double dbm_to_watts(double dbm);

// Per-user Shannon rates under treat-interference-as-noise:
//   f_i = log2(1 + p_i G_ii / (noise + sum_{j != i} p_j G_ji)).
// gain(j, i) is the power gain from transmitter j to receiver i.
Eigen::VectorXd rates(const Eigen::MatrixXd& gain, const Eigen::VectorXd& power,
                      double noise_watts);

// Jacobian J(i, j) = d f_i / d p_j of the rate formula above.
Eigen::MatrixXd rate_jacobian(const Eigen::MatrixXd& gain, const Eigen::VectorXd& power,
                              double noise_watts);

// Sum-rate utility.
double utility(const Eigen::VectorXd& rate_vec);

// Per-user minimum-rate slack g_i = x_i - f_min (>= 0 means satisfied).
Eigen::VectorXd constraint_slack(const Eigen::VectorXd& rate_vec, double f_min);

// Elementwise mean over a non-empty window of rate vectors.
Eigen::VectorXd ergodic_average(const std::vector<Eigen::VectorXd>& window);

}  // namespace rrm
