#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rrm/channel.hpp"
#include "rrm/dual.hpp"
#include "rrm/errors.hpp"
#include "rrm/rate.hpp"
#include "rrm/rng.hpp"

using namespace rrm;

namespace {

PolicyNet small_policy(std::uint64_t seed) {
  PolicyNet policy;
  policy.net = Mpnn::create({1, 8, 8, 1}, seed);
  policy.norm = GraphNorm{-8.0, 3.0};
  policy.p_max_watts = dbm_to_watts(10.0);
  return policy;
}

std::vector<NetworkState> small_states(int m, int T, std::uint64_t seed) {
  GeometryConfig cfg;
  cfg.num_users = m;
  cfg.seed = seed;
  const NetworkRealization real = generate_realization(cfg);
  return sample_fading_sequence(real, T, seed + 1);
}

}  // namespace

TEST_CASE("dual update arithmetic") {
  Eigen::VectorXd mu(2), slack(2);

  // zero slack is a fixed point
  mu << 0.7, 1.3;
  slack.setZero();
  CHECK(dual_update(mu, slack, 2.0) == mu);

  // projection clamps at zero
  Eigen::VectorXd mu1(1), s1(1);
  mu1 << 0.1;
  s1 << 1.0;
  CHECK(dual_update(mu1, s1, 2.0)(0) == 0.0);

  // violated constraints raise their multipliers
  mu << 1.0, 0.0;
  slack << -0.2, -0.2;
  const Eigen::VectorXd next = dual_update(mu, slack, 2.0);
  CHECK(next(0) == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(next(1) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("dual update enforces its preconditions") {
  Eigen::VectorXd mu(1), slack(1);
  mu << -0.1;
  slack << 0.0;
  CHECK_THROWS_AS(dual_update(mu, slack, 2.0), ConfigError);
  mu << 0.1;
  CHECK_THROWS_AS(dual_update(mu, slack, 0.0), ConfigError);
}

TEST_CASE("pre-projection step is exactly eta times the slack") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd mu(3), slack(3);
    for (int i = 0; i < 3; ++i) {
      mu(i) = rng.uniform(0.0, 3.0);
      slack(i) = rng.uniform(-1.0, 1.0);
    }
    const double eta = rng.uniform(0.1, 4.0);
    const Eigen::VectorXd next = dual_update(mu, slack, eta);
    for (int i = 0; i < 3; ++i) {
      CHECK(next(i) >= 0.0);
      const double raw = mu(i) - eta * slack(i);
      CHECK(next(i) == doctest::Approx(std::max(raw, 0.0)).epsilon(1e-15));
      if (slack(i) < 0.0) CHECK(next(i) > mu(i));
      if (slack(i) > 0.0) CHECK(next(i) <= mu(i));
    }
  }
}

TEST_CASE("zero duals reduce the Lagrangian to the utility") {
  const PolicyNet policy = small_policy(3);
  const auto states = small_states(3, 10, 9);
  const auto res =
      episode_lagrangian(policy, Eigen::VectorXd::Zero(3), states, 0.5, dbm_to_watts(-104.0));
  CHECK(res.penalty_term == doctest::Approx(0.0));
  CHECK(res.total == doctest::Approx(res.utility_term).epsilon(1e-14));
  CHECK(res.utility_term == doctest::Approx(utility(res.ergodic_rates)).epsilon(1e-12));
}

TEST_CASE("Lagrangian decomposes into utility plus penalty") {
  const PolicyNet policy = small_policy(4);
  const auto states = small_states(4, 12, 10);
  Eigen::VectorXd mu(4);
  mu << 0.5, 1.5, 0.0, 2.0;
  const auto res = episode_lagrangian(policy, mu, states, 0.6, dbm_to_watts(-104.0));
  CHECK(res.total == doctest::Approx(res.utility_term + res.penalty_term).epsilon(1e-12));
  const Eigen::VectorXd slack = constraint_slack(res.ergodic_rates, 0.6);
  CHECK(res.penalty_term == doctest::Approx(mu.dot(slack)).epsilon(1e-12));
}

TEST_CASE("Lagrangian at f_min equal to the ergodic rates is pure utility") {
  const PolicyNet policy = small_policy(6);
  const auto states = small_states(2, 8, 12);
  // First pass to learn the ergodic rates under this mu, then re-evaluate
  // with f_min at exactly user 0's rate: only user 0 carries a multiplier,
  // its slack is zero, so the penalty vanishes.
  Eigen::VectorXd mu(2);
  mu << 5.0, 0.0;
  const auto probe = episode_lagrangian(policy, mu, states, 0.0, dbm_to_watts(-104.0));
  const auto res = episode_lagrangian(policy, mu, states, probe.ergodic_rates(0),
                                      dbm_to_watts(-104.0));
  CHECK(res.penalty_term == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Lagrangian rejects negative duals and empty episodes") {
  const PolicyNet policy = small_policy(1);
  const auto states = small_states(2, 4, 2);
  Eigen::VectorXd mu(2);
  mu << 0.1, -0.1;
  CHECK_THROWS_AS(episode_lagrangian(policy, mu, states, 0.5, 1e-10), ConfigError);
  mu << 0.1, 0.1;
  CHECK_THROWS_AS(episode_lagrangian(policy, mu, {}, 0.5, 1e-10), StateError);
}

TEST_CASE("fixed arithmetic fixture for the Lagrangian definition") {
  // xbar = (0.7, 0.3), f_min = 0.5, mu = (1, 2):
  // L = 1.0 + (1 * 0.2 + 2 * (-0.2)) = 0.8
  Eigen::VectorXd xbar(2), mu(2);
  xbar << 0.7, 0.3;
  mu << 1.0, 2.0;
  const double L = utility(xbar) + mu.dot(constraint_slack(xbar, 0.5));
  CHECK(L == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("single-window Lagrangian matches window_constraint") {
  const PolicyNet policy = small_policy(15);
  const int T0 = 5;
  const auto states = small_states(3, T0, 44);
  Eigen::VectorXd mu(3);
  mu << 0.4, 1.1, 0.0;
  const double f_min = 0.5;
  const double noise = dbm_to_watts(-104.0);
  const auto res = episode_lagrangian(policy, mu, states, f_min, noise);
  const Eigen::VectorXd slack = window_constraint(policy, mu, states, f_min, noise);
  CHECK(res.total ==
        doctest::Approx(utility(res.ergodic_rates) + mu.dot(slack)).epsilon(1e-12));
  CHECK((constraint_slack(res.ergodic_rates, f_min) - slack).lpNorm<Eigen::Infinity>() <
        1e-12);
}

TEST_CASE("episode Lagrangian gradient matches finite differences") {
  const double noise = dbm_to_watts(-104.0);
  Rng rng(123);
  for (int trial = 0; trial < 5; ++trial) {
    const int m = 3;
    PolicyNet policy = small_policy(100 + trial);
    const auto states = small_states(m, 4, 200 + trial);
    Eigen::VectorXd mu(m);
    for (int i = 0; i < m; ++i) mu(i) = rng.uniform(0.0, 2.0);
    const double f_min = 0.5;

    Mpnn grad = Mpnn::zeros_like(policy.net);
    episode_lagrangian(policy, mu, states, f_min, noise, &grad);
    const Eigen::VectorXd g = grad.flatten();

    const Eigen::VectorXd theta = policy.net.flatten();
    const double h = 1e-5;
    for (Eigen::Index k = 0; k < theta.size(); k += 11) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp(k) += h;
      tm(k) -= h;
      PolicyNet pp = policy, pm = policy;
      pp.net.unflatten(tp);
      pm.net.unflatten(tm);
      const double fd = (episode_lagrangian(pp, mu, states, f_min, noise).total -
                         episode_lagrangian(pm, mu, states, f_min, noise).total) /
                        (2 * h);
      const double denom = std::max({std::abs(g(k)), std::abs(fd), 1e-6});
      CHECK(std::abs(g(k) - fd) / denom < 1e-4);
    }
  }
}

TEST_CASE("trace CSV carries one row per step and per window") {
  EpisodeTrace trace;
  trace.window_len = 2;
  trace.powers = Eigen::MatrixXd::Constant(4, 2, 0.01);
  trace.rates = Eigen::MatrixXd::Constant(4, 2, 1.5);
  trace.dual_iterates = Eigen::MatrixXd::Zero(3, 2);
  trace.window_slack = Eigen::MatrixXd::Constant(2, 2, 0.1);

  std::ostringstream out;
  trace.write_csv(out);
  const std::string text = out.str();
  int step_rows = 0, window_rows = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("step,", 0) == 0) ++step_rows;
    if (line.rfind("window,", 0) == 0) ++window_rows;
  }
  CHECK(step_rows == 4);
  CHECK(window_rows == 2);
}
