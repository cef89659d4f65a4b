#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rrm {

struct RateMetrics {
  double mean = 0.0;
  double min = 0.0;
  double p5 = 0.0;  // 5th percentile, linear interpolation between order statistics
};

// Reduces a pool of per-user ergodic rates (users x networks pooled together).
RateMetrics rate_metrics(const std::vector<double>& pool);

struct EvolutionPoint {
  int t = 0;
  RateMetrics metrics;
};

// Running ergodic averages: at each sampled t (multiples of stride plus
// the endpoint), computes (1/t) * sum_{tau < t} f per user, pools across
// all traces, and reduces. All traces must share length and width.
std::vector<EvolutionPoint> evolution_curves(const std::vector<Eigen::MatrixXd>& rate_traces,
                                             int stride);

// First step t at which the running minimum rate reaches 90% of its final
// value; 0 when the final value is not positive.
int transient_length(const Eigen::MatrixXd& rate_trace, double fraction = 0.9);

}  // namespace rrm
