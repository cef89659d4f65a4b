#include "rrm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rrm/errors.hpp"
#include "rrm/rate.hpp"

namespace rrm {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (horizon < 1) throw ConfigError("train.horizon must be >= 1");
  if (window_len < 1) throw ConfigError("train.window_len must be >= 1");
  if (horizon % window_len != 0)
    throw ConfigError("train.horizon must be divisible by train.window_len");
  const int num_windows = horizon / window_len;
  if (tail_windows < 1 || tail_windows > num_windows)
    throw ConfigError("train.tail_windows must be in [1, horizon / window_len]");
  if (history_epochs < 1) throw ConfigError("train.history_epochs must be >= 1");
  // dist_update_start >= epochs means the update window never opens
  // (the ablated training mode); the cross-field checks only bind when
  // the window is live.
  if (dist_update_start < epochs) {
    if (!(dist_update_start < dist_update_end))
      throw ConfigError("train.dist_update_start must be < dist_update_end");
    if (dist_update_end > epochs)
      throw ConfigError("train.dist_update_end must be <= epochs");
    if (history_epochs > dist_update_end - dist_update_start)
      throw ConfigError("train.history_epochs must be <= dist_update_end - dist_update_start");
    if (epochs < dist_update_end + history_epochs)
      throw ConfigError("train.epochs must be >= dist_update_end + history_epochs");
  }
  // lr_policy: any negative value selects the 0.1 / m default; zero is a
  // legitimate frozen-policy setting.
  if (!(lr_regressor > 0.0)) throw ConfigError("train.lr_regressor must be > 0");
  if (!(lr_dual > 0.0)) throw ConfigError("train.lr_dual must be > 0");
  if (regressor_epochs < 1) throw ConfigError("train.regressor_epochs must be >= 1");
  if (f_min < 0.0) throw ConfigError("train.f_min must be >= 0");
  if (train_size < 1) throw ConfigError("train.train_size must be >= 1");
  if (test_size < 0) throw ConfigError("train.test_size must be >= 0");
  if (hidden_dims.empty()) throw ConfigError("train.hidden_dims must not be empty");
  for (int d : hidden_dims)
    if (d < 1) throw ConfigError("train.hidden_dims entries must be >= 1");
  if (!(mu_scale > 0.0)) throw ConfigError("train.mu_scale must be > 0");
  if (!(edge_scale_decades > 0.0)) throw ConfigError("train.edge_scale_decades must be > 0");
}

Eigen::VectorXd DualDistribution::sample(Rng& rng) const {
  if (mode == Mode::kInitial) {
    Eigen::VectorXd mu(num_users);
    for (int i = 0; i < num_users; ++i) mu(i) = rng.uniform();
    return mu;
  }
  if (support.empty()) throw StateError("DualDistribution: empty empirical multiset");
  const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(support.size()));
  return support[std::min(idx, support.size() - 1)];
}

const Eigen::VectorXd& DualDistribution::support_at(std::size_t idx) const {
  if (mode != Mode::kEmpirical || idx >= support.size())
    throw StateError("DualDistribution: support index out of range");
  return support[idx];
}

Eigen::VectorXd sample_duals(const DualDistribution& dist, Rng& rng) {
  return dist.sample(rng);
}

void DualTrajectoryBuffer::push_epoch(std::vector<std::vector<Eigen::VectorXd>> tails) {
  if (static_cast<int>(tails.size()) != num_networks_)
    throw StateError("DualTrajectoryBuffer: wrong number of networks");
  epochs_.push_back(std::move(tails));
  while (static_cast<int>(epochs_.size()) > capacity_) epochs_.pop_front();
}

std::vector<Eigen::VectorXd> DualTrajectoryBuffer::averages() const {
  if (epochs_.empty()) throw StateError("DualTrajectoryBuffer: empty buffer");
  const auto& first = epochs_.front().front().front();
  std::vector<Eigen::VectorXd> avg(static_cast<std::size_t>(num_networks_),
                                   Eigen::VectorXd::Zero(first.size()));
  long count = 0;
  for (const auto& epoch : epochs_) {
    for (int b = 0; b < num_networks_; ++b) {
      for (const auto& mu : epoch[static_cast<std::size_t>(b)]) {
        avg[static_cast<std::size_t>(b)] += mu;
      }
    }
    count += static_cast<long>(epoch.front().size());
  }
  for (auto& v : avg) v /= static_cast<double>(count);
  return avg;
}

void DualTrajectoryBuffer::restore(
    std::deque<std::vector<std::vector<Eigen::VectorXd>>> epochs) {
  epochs_ = std::move(epochs);
  while (static_cast<int>(epochs_.size()) > capacity_) epochs_.pop_front();
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return Rng::substream(seed, {tag}).next_u64();
}

DualDistribution update_dual_distribution_impl(const DualTrajectoryBuffer& buffer) {
  DualDistribution dist;
  dist.mode = DualDistribution::Mode::kEmpirical;
  dist.support = buffer.averages();
  dist.num_users = static_cast<int>(dist.support.front().size());
  return dist;
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, std::vector<NetworkRealization> dataset)
    : cfg_(std::move(cfg)), dataset_(std::move(dataset)) {
  cfg_.validate();
  if (dataset_.empty()) throw ConfigError("Trainer: empty dataset");
  if (static_cast<int>(dataset_.size()) != cfg_.train_size)
    throw ConfigError("Trainer: dataset size " + std::to_string(dataset_.size()) +
                      " != train.train_size " + std::to_string(cfg_.train_size));
  const int m = dataset_.front().size();
  for (const auto& real : dataset_) {
    if (real.size() != m) throw ConfigError("Trainer: mixed network sizes in dataset");
  }

  // Edge normalization midpoint: median direct-link gain of the training set.
  std::vector<double> direct;
  for (const auto& real : dataset_) {
    for (int i = 0; i < m; ++i) direct.push_back(real.long_term_gain(i, i));
  }
  std::sort(direct.begin(), direct.end());
  const std::size_t n = direct.size();
  const double median = (n % 2 == 1) ? direct[n / 2]
                                     : 0.5 * (direct[n / 2 - 1] + direct[n / 2]);
  GraphNorm norm{std::log10(median), cfg_.edge_scale_decades};

  std::vector<int> dims;
  dims.push_back(1);
  for (int d : cfg_.hidden_dims) dims.push_back(d);
  dims.push_back(1);

  policy_.net = Mpnn::create(dims, derive_seed(cfg_.seed, 10));
  policy_.norm = norm;
  policy_.p_max_watts = dbm_to_watts(cfg_.p_max_dbm);
  policy_.mu_scale = cfg_.mu_scale;

  regressor_.net = Mpnn::create(dims, derive_seed(cfg_.seed, 11));
  regressor_.norm = norm;

  dist_.mode = DualDistribution::Mode::kInitial;
  dist_.num_users = m;
  buffer_ = DualTrajectoryBuffer(cfg_.history_epochs, static_cast<int>(dataset_.size()));
}

EpochResult Trainer::train_epoch() {
  const int n = epoch_;
  const int m = dataset_.front().size();
  const int num_windows = cfg_.horizon / cfg_.window_len;
  const double noise_w = dbm_to_watts(cfg_.noise_dbm);
  const int num_networks = static_cast<int>(dataset_.size());

  Rng dual_rng = Rng::substream(cfg_.seed, {20, static_cast<std::uint64_t>(n)});

  EpochResult result;
  result.dual_tails.resize(static_cast<std::size_t>(num_networks));
  result.log.epoch = n;

  Mpnn batch_grad = Mpnn::zeros_like(policy_.net);
  Eigen::VectorXd epoch_grad_sum = Eigen::VectorXd::Zero(policy_.net.param_count());
  int in_batch = 0;
  int batches_done = 0;

  for (int net_idx = 0; net_idx < num_networks; ++net_idx) {
    Eigen::VectorXd mu;
    if (cfg_.pinned_dual_sampling && dist_.mode == DualDistribution::Mode::kEmpirical) {
      mu = dist_.support_at(static_cast<std::size_t>(net_idx));
      dual_rng.uniform();  // keep the stream aligned with the default mode
    } else {
      mu = sample_duals(dist_, dual_rng);
    }

    const std::uint64_t fading_seed =
        Rng::substream(cfg_.seed,
                       {21, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(net_idx)})
            .next_u64();
    const auto states = sample_fading_sequence(dataset_[static_cast<std::size_t>(net_idx)],
                                               cfg_.horizon, fading_seed, cfg_.unit_fading);

    // Rollout: decisions use the sampled mu (Lagrangian evaluation) while
    // the background trajectory mu_tilde evolves from the window slacks.
    Mpnn episode_grad = Mpnn::zeros_like(policy_.net);
    Eigen::VectorXd mu_tilde = mu;
    auto& tails = result.dual_tails[static_cast<std::size_t>(net_idx)];

    if (!cfg_.self_consistent_rollout) {
      // Single pass: the background slacks reuse the rates of the
      // gradient rollout since both use the same policy input mu.
      std::vector<Mpnn::Cache> caches(states.size());
      std::vector<Eigen::VectorXd> step_powers(states.size());
      std::vector<Eigen::VectorXd> step_rates(states.size());
      for (int t = 0; t < cfg_.horizon; ++t) {
        const auto& state = states[static_cast<std::size_t>(t)];
        step_powers[static_cast<std::size_t>(t)] =
            policy_.forward(state.gain, mu, &caches[static_cast<std::size_t>(t)]);
        step_rates[static_cast<std::size_t>(t)] =
            rates(state.gain, step_powers[static_cast<std::size_t>(t)], noise_w);
      }
      for (int k = 0; k < num_windows; ++k) {
        Eigen::VectorXd window_avg = Eigen::VectorXd::Zero(m);
        for (int t = k * cfg_.window_len; t < (k + 1) * cfg_.window_len; ++t) {
          window_avg += step_rates[static_cast<std::size_t>(t)];
        }
        window_avg /= static_cast<double>(cfg_.window_len);
        mu_tilde = dual_update(mu_tilde, constraint_slack(window_avg, cfg_.f_min),
                               cfg_.lr_dual);
        if (k >= num_windows - cfg_.tail_windows) tails.push_back(mu_tilde);
      }

      const Eigen::VectorXd ergodic = ergodic_average(step_rates);
      const double util = utility(ergodic);
      const double penalty = mu.dot(constraint_slack(ergodic, cfg_.f_min));
      result.log.mean_lagrangian += util + penalty;
      result.log.mean_utility += util;
      result.log.mean_penalty += penalty;

      const Eigen::VectorXd d_rates =
          (Eigen::VectorXd::Ones(m) + mu) / static_cast<double>(cfg_.horizon);
      for (int t = 0; t < cfg_.horizon; ++t) {
        const auto& state = states[static_cast<std::size_t>(t)];
        const Eigen::MatrixXd jac =
            rate_jacobian(state.gain, step_powers[static_cast<std::size_t>(t)], noise_w);
        policy_.backward(caches[static_cast<std::size_t>(t)],
                         jac.transpose() * d_rates, episode_grad);
      }
    } else {
      // Ablation flag: the background dynamics drive their own decisions.
      for (int k = 0; k < num_windows; ++k) {
        const std::vector<NetworkState> window(
            states.begin() + k * cfg_.window_len,
            states.begin() + (k + 1) * cfg_.window_len);
        const Eigen::VectorXd slack =
            window_constraint(policy_, mu_tilde, window, cfg_.f_min, noise_w);
        mu_tilde = dual_update(mu_tilde, slack, cfg_.lr_dual);
        if (k >= num_windows - cfg_.tail_windows) tails.push_back(mu_tilde);
      }
      const LagrangianResult lag =
          episode_lagrangian(policy_, mu, states, cfg_.f_min, noise_w, &episode_grad);
      result.log.mean_lagrangian += lag.total;
      result.log.mean_utility += lag.utility_term;
      result.log.mean_penalty += lag.penalty_term;
    }

    const Eigen::VectorXd flat_grad = episode_grad.flatten();
    if (!flat_grad.allFinite())
      throw NumericError("train_epoch: non-finite gradient for network " +
                         std::to_string(net_idx) + " in epoch " + std::to_string(n));
    epoch_grad_sum += flat_grad;
    batch_grad.add_scaled(episode_grad, 1.0);
    ++in_batch;

    const bool batch_done =
        in_batch == cfg_.batch_size || net_idx + 1 == num_networks;
    if (batch_done) {
      apply_update(batch_grad, in_batch, result.log);
      batch_grad = Mpnn::zeros_like(policy_.net);
      in_batch = 0;
      ++batches_done;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(num_networks);
  result.log.mean_lagrangian *= inv_n;
  result.log.mean_utility *= inv_n;
  result.log.mean_penalty *= inv_n;
  result.log.grad_norm = (epoch_grad_sum * inv_n).norm();

  buffer_.push_epoch(result.dual_tails);

  if (n >= cfg_.dist_update_start && n < cfg_.dist_update_end && buffer_.full()) {
    dist_ = update_dual_distribution(buffer_, n, cfg_);
  }
  if (n == cfg_.dist_update_end + cfg_.history_epochs - 1) {
    regressor_targets_ = buffer_.averages();
  }

  if (buffer_.full()) {
    const auto avgs = buffer_.averages();
    double sum = 0.0;
    double min_v = std::numeric_limits<double>::infinity();
    long count = 0;
    for (const auto& v : avgs) {
      sum += v.sum();
      min_v = std::min(min_v, v.minCoeff());
      count += v.size();
    }
    result.log.mu_bar_mean = sum / static_cast<double>(count);
    result.log.mu_bar_min = min_v;
  } else {
    result.log.mu_bar_mean = std::numeric_limits<double>::quiet_NaN();
    result.log.mu_bar_min = std::numeric_limits<double>::quiet_NaN();
  }

  ++epoch_;
  return result;
}

void Trainer::apply_update(const Mpnn& batch_grad_sum, int batch_count, TrainLogRow&) {
  const int m = dataset_.front().size();
  const double lr = cfg_.lr_policy_effective(m);
  const Eigen::VectorXd mean_grad =
      batch_grad_sum.flatten() / static_cast<double>(batch_count);
  Eigen::VectorXd params = policy_.net.flatten();

  if (!cfg_.adam) {
    params += lr * mean_grad;
  } else {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (adam_m_.size() != params.size()) {
      adam_m_ = Eigen::VectorXd::Zero(params.size());
      adam_v_ = Eigen::VectorXd::Zero(params.size());
      adam_steps_ = 0;
    }
    ++adam_steps_;
    adam_m_ = beta1 * adam_m_ + (1.0 - beta1) * mean_grad;
    adam_v_ = beta2 * adam_v_ + (1.0 - beta2) * mean_grad.cwiseProduct(mean_grad);
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_steps_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_steps_));
    const Eigen::VectorXd m_hat = adam_m_ / bc1;
    const Eigen::VectorXd v_hat = adam_v_ / bc2;
    params += lr * (m_hat.array() / (v_hat.array().sqrt() + eps)).matrix();
  }
  policy_.net.unflatten(params);
}

DualDistribution update_dual_distribution(const DualTrajectoryBuffer& buffer, int epoch,
                                          const TrainConfig& cfg) {
  if (epoch < cfg.dist_update_start || epoch >= cfg.dist_update_end)
    throw StateError("update_dual_distribution: epoch outside the update window");
  if (!buffer.full())
    throw StateError("update_dual_distribution: buffer holds fewer than N0 epochs");
  return update_dual_distribution_impl(buffer);
}

std::vector<RegressorLogRow> Trainer::fit_regressor(
    const std::vector<Eigen::VectorXd>& targets) {
  if (targets.empty()) throw StateError("fit_regressor: no training pairs");
  if (targets.size() != dataset_.size())
    throw StateError("fit_regressor: target count does not match dataset");
  for (const auto& t : targets) {
    if ((t.array() < 0.0).any())
      throw ConfigError("fit_regressor: targets must be nonnegative");
  }

  const int m = dataset_.front().size();
  const double scale = 1.0 / (static_cast<double>(targets.size()) * m);

  auto eval = [&](bool with_grad, Mpnn* grad) {
    double loss = 0.0;
    for (std::size_t b = 0; b < dataset_.size(); ++b) {
      Mpnn::Cache cache;
      const Eigen::VectorXd pred =
          regressor_.forward(dataset_[b].long_term_gain, with_grad ? &cache : nullptr);
      const Eigen::VectorXd diff = pred - targets[b];
      loss += scale * diff.squaredNorm();
      if (with_grad) regressor_.backward(cache, 2.0 * scale * diff, *grad);
    }
    return loss;
  };

  std::vector<RegressorLogRow> log;
  double lr = cfg_.lr_regressor;
  for (int epoch = 0; epoch < cfg_.regressor_epochs; ++epoch) {
    Mpnn grad = Mpnn::zeros_like(regressor_.net);
    const double loss = eval(true, &grad);
    const Eigen::VectorXd params = regressor_.net.flatten();
    const Eigen::VectorXd grad_flat = grad.flatten();

    // Step-size backoff: halve until the loss does not increase.
    double new_loss = loss;
    while (lr > 1e-15) {
      regressor_.net.unflatten(params - lr * grad_flat);
      new_loss = eval(false, nullptr);
      if (new_loss <= loss) break;
      lr *= 0.5;
    }
    if (new_loss > loss) {
      regressor_.net.unflatten(params);  // no usable step this epoch
      new_loss = loss;
    }
    log.push_back({epoch, new_loss, lr});
  }
  return log;
}

TrainResult Trainer::run(const std::function<void(const TrainLogRow&)>& on_epoch) {
  TrainResult result;
  while (epoch_ < cfg_.epochs) {
    EpochResult er = train_epoch();
    if (on_epoch) on_epoch(er.log);
    result.log.push_back(er.log);
  }
  if (regressor_targets_.empty()) {
    // Update window never opened far enough; fall back to the most recent
    // buffered averages so an ablated run still yields a regressor.
    regressor_targets_ = buffer_.averages();
  }
  result.regressor_log = fit_regressor(regressor_targets_);
  result.policy = policy_;
  result.regressor = regressor_;
  result.distribution = dist_;
  result.regressor_targets = regressor_targets_;
  return result;
}

TrainResult train(const TrainConfig& cfg, const std::vector<NetworkRealization>& dataset,
                  const std::function<void(const TrainLogRow&)>& on_epoch) {
  Trainer trainer(cfg, dataset);
  return trainer.run(on_epoch);
}

}  // namespace rrm
