#include <benchmark/benchmark.h>

#include "rrm/channel.hpp"
#include "rrm/dual.hpp"
#include "rrm/executor.hpp"
#include "rrm/gnn.hpp"
#include "rrm/rate.hpp"

namespace {

using namespace rrm;

struct Fixture {
  NetworkRealization real;
  PolicyNet policy;
  Eigen::VectorXd mu;

  explicit Fixture(int m) {
    GeometryConfig geo;
    geo.num_users = m;
    geo.seed = 17;
    real = generate_realization(geo);
    policy.net = Mpnn::create({1, 64, 64, 1}, 3);
    policy.norm = GraphNorm{-8.0, 3.0};
    policy.p_max_watts = dbm_to_watts(10.0);
    mu = Eigen::VectorXd::Constant(m, 0.5);
  }
};

void BM_PolicyForward(benchmark::State& state) {
  Fixture fix(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fix.policy.forward(fix.real.long_term_gain, fix.mu));
  }
}
BENCHMARK(BM_PolicyForward)->Arg(6)->Arg(12)->Arg(24);

void BM_PolicyBackward(benchmark::State& state) {
  Fixture fix(static_cast<int>(state.range(0)));
  const int m = fix.real.size();
  Mpnn grad = Mpnn::zeros_like(fix.policy.net);
  for (auto _ : state) {
    Mpnn::Cache cache;
    const Eigen::VectorXd p = fix.policy.forward(fix.real.long_term_gain, fix.mu, &cache);
    benchmark::DoNotOptimize(p);
    fix.policy.backward(cache, Eigen::VectorXd::Ones(m), grad);
  }
}
BENCHMARK(BM_PolicyBackward)->Arg(6)->Arg(12);

void BM_Rates(benchmark::State& state) {
  Fixture fix(static_cast<int>(state.range(0)));
  const int m = fix.real.size();
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(m, 0.005);
  const double noise = dbm_to_watts(-104.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rates(fix.real.long_term_gain, p, noise));
  }
}
BENCHMARK(BM_Rates)->Arg(6)->Arg(24)->Arg(48);

void BM_EpisodeLagrangianGrad(benchmark::State& state) {
  Fixture fix(6);
  const auto states = sample_fading_sequence(fix.real, 50, 5);
  for (auto _ : state) {
    Mpnn grad = Mpnn::zeros_like(fix.policy.net);
    benchmark::DoNotOptimize(
        episode_lagrangian(fix.policy, fix.mu, states, 0.4, dbm_to_watts(-104.0), &grad));
  }
}
BENCHMARK(BM_EpisodeLagrangianGrad);

void BM_Execute(benchmark::State& state) {
  Fixture fix(6);
  ExecutionConfig cfg;
  cfg.horizon = 200;
  cfg.window_len = 5;
  cfg.f_min = 0.4;
  cfg.init_mode = DualInitMode::kZeros;
  for (auto _ : state) {
    benchmark::DoNotOptimize(execute(fix.policy, nullptr, fix.real, cfg, 9));
  }
}
BENCHMARK(BM_Execute);

}  // namespace

BENCHMARK_MAIN();
