#include "rrm/dual.hpp"

#include <cstdio>
#include <ostream>
#include <string>

#include "rrm/errors.hpp"
#include "rrm/rate.hpp"

namespace rrm {

Eigen::VectorXd dual_update(const Eigen::VectorXd& mu, const Eigen::VectorXd& slack,
                            double eta) {
  if ((mu.array() < 0.0).any()) throw ConfigError("dual_update: negative dual variable");
  if (!(eta > 0.0)) throw ConfigError("dual_update: eta must be > 0");
  return (mu - eta * slack).cwiseMax(0.0);
}

LagrangianResult episode_lagrangian(const PolicyNet& policy, const Eigen::VectorXd& mu,
                                    const std::vector<NetworkState>& states, double f_min,
                                    double noise_watts, Mpnn* grad) {
  if (states.empty()) throw StateError("episode_lagrangian: empty state sequence");
  if ((mu.array() < 0.0).any())
    throw ConfigError("episode_lagrangian: negative dual variable");

  const int num_steps = static_cast<int>(states.size());
  const int m = static_cast<int>(mu.size());

  std::vector<Eigen::VectorXd> step_rates;
  step_rates.reserve(states.size());
  std::vector<Mpnn::Cache> caches;
  std::vector<Eigen::VectorXd> step_powers;
  if (grad) {
    caches.resize(states.size());
    step_powers.reserve(states.size());
  }

  for (int t = 0; t < num_steps; ++t) {
    Mpnn::Cache* cache = grad ? &caches[static_cast<std::size_t>(t)] : nullptr;
    Eigen::VectorXd p = policy.forward(states[static_cast<std::size_t>(t)].gain, mu, cache);
    step_rates.push_back(rates(states[static_cast<std::size_t>(t)].gain, p, noise_watts));
    if (grad) step_powers.push_back(std::move(p));
  }

  LagrangianResult result;
  result.ergodic_rates = ergodic_average(step_rates);
  result.utility_term = utility(result.ergodic_rates);
  result.penalty_term = mu.dot(constraint_slack(result.ergodic_rates, f_min));
  result.total = result.utility_term + result.penalty_term;
  if (!std::isfinite(result.total))
    throw NumericError("episode_lagrangian: non-finite Lagrangian value");

  if (grad) {
    // dL/dxbar = 1 + mu (sum utility, linear slacks), so
    // dL/df_t = (1 + mu) / T and dL/dp_t = J_t^T (1 + mu) / T.
    const Eigen::VectorXd d_rates =
        (Eigen::VectorXd::Ones(m) + mu) / static_cast<double>(num_steps);
    for (int t = 0; t < num_steps; ++t) {
      const auto& state = states[static_cast<std::size_t>(t)];
      const Eigen::MatrixXd jac =
          rate_jacobian(state.gain, step_powers[static_cast<std::size_t>(t)], noise_watts);
      const Eigen::VectorXd d_power = jac.transpose() * d_rates;
      policy.backward(caches[static_cast<std::size_t>(t)], d_power, *grad);
    }
  }
  return result;
}

Eigen::VectorXd window_constraint(const PolicyNet& policy, const Eigen::VectorXd& mu,
                                  const std::vector<NetworkState>& window, double f_min,
                                  double noise_watts) {
  if (window.empty()) throw StateError("window_constraint: empty window");
  if ((mu.array() < 0.0).any())
    throw ConfigError("window_constraint: negative dual variable");
  std::vector<Eigen::VectorXd> step_rates;
  step_rates.reserve(window.size());
  for (const auto& state : window) {
    const Eigen::VectorXd p = policy.forward(state.gain, mu);
    step_rates.push_back(rates(state.gain, p, noise_watts));
  }
  return constraint_slack(ergodic_average(step_rates), f_min);
}

void EpisodeTrace::write_csv(std::ostream& out) const {
  const int m = num_users();
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << ',' << buf;
  };

  out << "row,index";
  for (int i = 0; i < m; ++i) out << ",p" << i;
  for (int i = 0; i < m; ++i) out << ",f" << i;
  out << '\n';
  for (int t = 0; t < num_steps(); ++t) {
    out << "step," << t;
    for (int i = 0; i < m; ++i) put(powers(t, i));
    for (int i = 0; i < m; ++i) put(rates(t, i));
    out << '\n';
  }
  for (int k = 0; k < num_windows(); ++k) {
    out << "window," << k;
    for (int i = 0; i < m; ++i) put(dual_iterates(k, i));
    for (int i = 0; i < m; ++i) put(window_slack(k, i));
    out << '\n';
  }
}

}  // namespace rrm
