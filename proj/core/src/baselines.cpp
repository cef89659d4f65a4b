#include "rrm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rrm/errors.hpp"

namespace rrm {

Eigen::VectorXd full_reuse(int num_users, double p_max_watts) {
  if (num_users < 1) throw ConfigError("full_reuse: num_users must be >= 1");
  return Eigen::VectorXd::Constant(num_users, p_max_watts);
}

void ITLinQConfig::validate() const {
  if (!std::isfinite(threshold_db)) throw ConfigError("itlinq.threshold_db must be finite");
  if (!(snr_exponent > 0.0) || snr_exponent > 1.0)
    throw ConfigError("itlinq.snr_exponent must be in (0, 1]");
}

Eigen::VectorXd itlinq_schedule(const Eigen::MatrixXd& long_term_gain, double noise_watts,
                                double p_max_watts, const ITLinQConfig& cfg) {
  cfg.validate();
  const int m = static_cast<int>(long_term_gain.rows());
  if ((long_term_gain.array() <= 0.0).any())
    throw NumericError("itlinq_schedule: gains must be strictly positive");
  if (!(noise_watts > 0.0)) throw ConfigError("itlinq_schedule: noise must be > 0");

  const double m_lin = std::pow(10.0, cfg.threshold_db / 10.0);
  Eigen::VectorXd snr(m);
  for (int i = 0; i < m; ++i) snr(i) = p_max_watts * long_term_gain(i, i) / noise_watts;
  auto inr = [&](int i, int j) {  // interference tx_i -> rx_j, in noise units
    return p_max_watts * long_term_gain(i, j) / noise_watts;
  };

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return snr(a) > snr(b); });

  std::vector<int> active;
  for (int j : order) {
    const double budget_j = m_lin * std::pow(snr(j), cfg.snr_exponent);
    bool admit = true;
    for (int i : active) {
      const double budget_i = m_lin * std::pow(snr(i), cfg.snr_exponent);
      if (inr(i, j) > budget_j || inr(j, i) > budget_i) {
        admit = false;
        break;
      }
    }
    if (admit) active.push_back(j);
  }

  Eigen::VectorXd p = Eigen::VectorXd::Zero(m);
  for (int i : active) p(i) = p_max_watts;
  return p;
}

}  // namespace rrm
