#include "rrm/rate.hpp"

#include <cmath>
#include <string>

#include "rrm/errors.hpp"

namespace rrm {

namespace {
constexpr double kLn2 = 0.69314718055994530941723212145818;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

Eigen::VectorXd rates(const Eigen::MatrixXd& gain, const Eigen::VectorXd& power,
                      double noise_watts) {
  const int m = static_cast<int>(power.size());
  if (gain.rows() != m || gain.cols() != m)
    throw ConfigError("rates: gain matrix shape does not match power vector");
  if (!(noise_watts > 0.0)) throw ConfigError("rates: noise must be > 0");
  for (int i = 0; i < m; ++i) {
    if (!std::isfinite(power(i)))
      throw NumericError("rates: non-finite power at entry " + std::to_string(i));
    for (int j = 0; j < m; ++j) {
      if (!std::isfinite(gain(i, j)))
        throw NumericError("rates: non-finite gain at (" + std::to_string(i) + ", " +
                           std::to_string(j) + ")");
    }
  }

  Eigen::VectorXd f(m);
  for (int i = 0; i < m; ++i) {
    double interference = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j != i) interference += power(j) * gain(j, i);
    }
    const double sinr = power(i) * gain(i, i) / (noise_watts + interference);
    f(i) = std::log1p(sinr) / kLn2;
  }
  return f;
}

Eigen::MatrixXd rate_jacobian(const Eigen::MatrixXd& gain, const Eigen::VectorXd& power,
                              double noise_watts) {
  const int m = static_cast<int>(power.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    double interference = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j != i) interference += power(j) * gain(j, i);
    }
    const double denom = noise_watts + interference;          // D_i
    const double signal = power(i) * gain(i, i);              // S_i
    jac(i, i) = gain(i, i) / (denom + signal) / kLn2;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      jac(i, j) = -signal * gain(j, i) / (denom * (denom + signal)) / kLn2;
    }
  }
  return jac;
}

double utility(const Eigen::VectorXd& rate_vec) { return rate_vec.sum(); }

Eigen::VectorXd constraint_slack(const Eigen::VectorXd& rate_vec, double f_min) {
  if (f_min < 0.0) throw ConfigError("constraint_slack: f_min must be >= 0");
  return rate_vec.array() - f_min;
}

Eigen::VectorXd ergodic_average(const std::vector<Eigen::VectorXd>& window) {
  if (window.empty()) throw StateError("ergodic_average: empty window");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(window.front().size());
  for (const auto& v : window) acc += v;
  return acc / static_cast<double>(window.size());
}

}  // namespace rrm
