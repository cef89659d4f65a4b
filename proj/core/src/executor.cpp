#include "rrm/executor.hpp"

#include "rrm/errors.hpp"
#include "rrm/rate.hpp"
#include "rrm/rng.hpp"

namespace rrm {

void ExecutionConfig::validate() const {
  if (horizon < 1) throw ConfigError("exec.horizon must be >= 1");
  if (window_len < 1) throw ConfigError("exec.window_len must be >= 1");
  if (horizon % window_len != 0)
    throw ConfigError("exec.horizon must be divisible by exec.window_len");
  if (lr_dual < 0.0) throw ConfigError("exec.lr_dual must be >= 0");
  if (f_min < 0.0) throw ConfigError("exec.f_min must be >= 0");
}

EpisodeTrace execute(const PolicyNet& policy, const RegressorNet* regressor,
                     const NetworkRealization& realization, const ExecutionConfig& cfg,
                     std::uint64_t seed) {
  cfg.validate();
  const int m = realization.size();
  if (policy.net.input_dim() != 1)
    throw ConfigError("execute: policy input dim must be 1 (dual variable feature)");

  Eigen::VectorXd mu;
  switch (cfg.init_mode) {
    case DualInitMode::kRegressor: {
      if (!regressor)
        throw ConfigError("execute: init_mode=regressor requires a regressor model");
      mu = regressor->forward(realization.long_term_gain);
      if (static_cast<int>(mu.size()) != m)
        throw ConfigError("execute: regressor output size does not match network");
      break;
    }
    case DualInitMode::kZeros:
      mu = Eigen::VectorXd::Zero(m);
      break;
    case DualInitMode::kUniform: {
      Rng rng = Rng::substream(seed, {5});
      mu.resize(m);
      for (int i = 0; i < m; ++i) mu(i) = rng.uniform();
      break;
    }
  }

  const double noise_w = dbm_to_watts(cfg.noise_dbm);
  const auto states = sample_fading_sequence(realization, cfg.horizon, seed, cfg.unit_fading);
  const int num_windows = cfg.horizon / cfg.window_len;

  EpisodeTrace trace;
  trace.window_len = cfg.window_len;
  trace.powers.resize(cfg.horizon, m);
  trace.rates.resize(cfg.horizon, m);
  trace.dual_iterates.resize(num_windows + 1, m);
  trace.window_slack.resize(num_windows, m);

  double penalty_acc = 0.0;
  for (int k = 0; k < num_windows; ++k) {
    trace.dual_iterates.row(k) = mu.transpose();
    Eigen::VectorXd window_avg = Eigen::VectorXd::Zero(m);
    for (int t = k * cfg.window_len; t < (k + 1) * cfg.window_len; ++t) {
      const auto& state = states[static_cast<std::size_t>(t)];
      const Eigen::VectorXd p = policy.forward(state.gain, mu);
      const Eigen::VectorXd f = rates(state.gain, p, noise_w);
      trace.powers.row(t) = p.transpose();
      trace.rates.row(t) = f.transpose();
      window_avg += f;
    }
    window_avg /= static_cast<double>(cfg.window_len);
    const Eigen::VectorXd slack = constraint_slack(window_avg, cfg.f_min);
    trace.window_slack.row(k) = slack.transpose();
    penalty_acc += mu.dot(slack);
    if (cfg.lr_dual > 0.0) mu = dual_update(mu, slack, cfg.lr_dual);
  }
  trace.dual_iterates.row(num_windows) = mu.transpose();

  const Eigen::VectorXd ergodic =
      trace.rates.colwise().mean().transpose();
  trace.utility_term = utility(ergodic);
  trace.penalty_term = penalty_acc / static_cast<double>(num_windows);
  trace.lagrangian = trace.utility_term + trace.penalty_term;
  return trace;
}

FeasibilityReport feasibility_report(const EpisodeTrace& trace, double f_min, int burn_in) {
  const int num_steps = trace.num_steps();
  if (burn_in < 0 || burn_in >= num_steps)
    throw ConfigError("feasibility_report: burn_in must be in [0, num_steps)");
  const int m = trace.num_users();
  FeasibilityReport report;
  report.avg_rate =
      trace.rates.bottomRows(num_steps - burn_in).colwise().mean().transpose();
  report.margin = report.avg_rate.array() - f_min;
  report.feasible.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) report.feasible[static_cast<std::size_t>(i)] = report.margin(i) >= 0.0;
  return report;
}

}  // namespace rrm
