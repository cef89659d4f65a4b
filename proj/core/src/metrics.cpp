#include "rrm/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rrm/errors.hpp"

namespace rrm {

RateMetrics rate_metrics(const std::vector<double>& pool) {
  if (pool.empty()) throw StateError("rate_metrics: empty pool");
  std::vector<double> sorted = pool;
  std::sort(sorted.begin(), sorted.end());

  RateMetrics metrics;
  metrics.min = sorted.front();
  double sum = 0.0;
  for (double v : sorted) sum += v;
  metrics.mean = sum / static_cast<double>(sorted.size());

  // Inclusive linear interpolation: rank = q * (n - 1).
  const double rank = 0.05 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - std::floor(rank);
  if (lo + 1 < sorted.size()) {
    metrics.p5 = sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  } else {
    metrics.p5 = sorted[lo];
  }
  return metrics;
}

std::vector<EvolutionPoint> evolution_curves(const std::vector<Eigen::MatrixXd>& rate_traces,
                                             int stride) {
  if (rate_traces.empty()) throw StateError("evolution_curves: no traces");
  if (stride < 1) throw ConfigError("evolution_curves: stride must be >= 1");
  const Eigen::Index num_steps = rate_traces.front().rows();
  const Eigen::Index num_users = rate_traces.front().cols();
  for (const auto& trace : rate_traces) {
    if (trace.rows() != num_steps || trace.cols() != num_users)
      throw StateError("evolution_curves: traces have mismatched shapes");
  }

  // Running per-user sums per trace; sample at stride multiples and the endpoint.
  std::vector<Eigen::VectorXd> sums;
  sums.reserve(rate_traces.size());
  for (const auto& trace : rate_traces) sums.push_back(Eigen::VectorXd::Zero(trace.cols()));

  std::vector<EvolutionPoint> points;
  for (Eigen::Index t = 0; t < num_steps; ++t) {
    for (std::size_t n = 0; n < rate_traces.size(); ++n) {
      sums[n] += rate_traces[n].row(static_cast<int>(t)).transpose();
    }
    const int steps_done = static_cast<int>(t) + 1;
    if (steps_done % stride == 0 || t + 1 == num_steps) {
      std::vector<double> pool;
      for (const auto& sum : sums) {
        for (Eigen::Index i = 0; i < sum.size(); ++i) {
          pool.push_back(sum(i) / static_cast<double>(steps_done));
        }
      }
      points.push_back({steps_done, rate_metrics(pool)});
      if (t + 1 == num_steps) break;  // avoid a duplicate endpoint sample
    }
  }
  return points;
}

int transient_length(const Eigen::MatrixXd& rate_trace, double fraction) {
  const int num_steps = static_cast<int>(rate_trace.rows());
  if (num_steps == 0) throw StateError("transient_length: empty trace");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(rate_trace.cols());
  std::vector<double> running_min(static_cast<std::size_t>(num_steps));
  for (int t = 0; t < num_steps; ++t) {
    sum += rate_trace.row(t).transpose();
    running_min[static_cast<std::size_t>(t)] = (sum / double(t + 1)).minCoeff();
  }
  const double target = fraction * running_min.back();
  if (!(target > 0.0)) return 0;
  for (int t = 0; t < num_steps; ++t) {
    if (running_min[static_cast<std::size_t>(t)] >= target) return t + 1;
  }
  return num_steps;
}

}  // namespace rrm
