#include <doctest.h>

#include <cmath>

#include "rrm/channel.hpp"
#include "rrm/errors.hpp"
#include "rrm/rng.hpp"

using namespace rrm;

TEST_CASE("pathloss at the reference distance is the reference gain") {
  PathlossParams params;
  CHECK(pathloss_gain(params.ref_distance, params) == doctest::Approx(params.ref_gain));
  params.ref_gain = 3.5;
  CHECK(pathloss_gain(1.0, params) == doctest::Approx(3.5));
}

TEST_CASE("pathloss is continuous at the breakpoint") {
  PathlossParams params;
  const double below = pathloss_gain(params.break_distance, params);
  const double above = pathloss_gain(params.break_distance * (1.0 + 1e-12), params);
  CHECK(above == doctest::Approx(below).epsilon(1e-9));
}

TEST_CASE("pathloss follows the power law below the breakpoint") {
  PathlossParams params;
  const double g1 = pathloss_gain(10.0, params);
  const double g2 = pathloss_gain(20.0, params);
  CHECK(g2 / g1 == doctest::Approx(std::pow(2.0, -params.exponent_near)));
}

TEST_CASE("pathloss two-segment fixture") {
  // d0=1, a1=2, a2=4, d_bp=50, PL0=1, d=100 -> 50^-2 * 2^-4 = 2.5e-5
  PathlossParams params;
  CHECK(pathloss_gain(100.0, params) == doctest::Approx(2.5e-5).epsilon(1e-12));
}

TEST_CASE("pathloss rejects non-positive distance") {
  CHECK_THROWS_AS(pathloss_gain(0.0), NumericError);
  CHECK_THROWS_AS(pathloss_gain(-1.0), NumericError);
}

TEST_CASE("fixed-density area radius formula") {
  GeometryConfig cfg;
  cfg.density = DensityMode::kFixed;
  for (int m : {1, 6, 12, 20, 50}) {
    cfg.num_users = m;
    CHECK(cfg.area_radius() == doctest::Approx(std::sqrt(m / 20.0) * 1000.0));
  }
  cfg.num_users = 12;
  CHECK(cfg.area_radius() == doctest::Approx(774.5966692414834));
  cfg.density = DensityMode::kVariable;
  CHECK(cfg.area_radius() == doctest::Approx(500.0));
}

TEST_CASE("geometry config validation names the offending field") {
  GeometryConfig cfg;
  cfg.num_users = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), "geometry.num_users must be >= 1", ConfigError);
  cfg.num_users = 6;
  cfg.rx_distance_min = 300.0;
  cfg.rx_distance_max = 200.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.rx_distance_min = 10.0;
  cfg.rx_distance_max = 1e6;  // beyond the area radius
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("realizations are deterministic in the seed") {
  GeometryConfig cfg;
  cfg.num_users = 8;
  cfg.seed = 1234;
  const NetworkRealization a = generate_realization(cfg);
  const NetworkRealization b = generate_realization(cfg);
  CHECK(a.tx_positions == b.tx_positions);
  CHECK(a.rx_positions == b.rx_positions);
  CHECK(a.long_term_gain == b.long_term_gain);

  cfg.seed = 1235;
  const NetworkRealization c = generate_realization(cfg);
  CHECK(a.long_term_gain != c.long_term_gain);
}

TEST_CASE("realization gains are strictly positive and finite") {
  GeometryConfig cfg;
  cfg.num_users = 10;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const NetworkRealization real = generate_realization(cfg);
    CHECK((real.long_term_gain.array() > 0.0).all());
    CHECK(real.long_term_gain.allFinite());
    // receivers inside the annulus
    for (int i = 0; i < cfg.num_users; ++i) {
      const double d = (real.tx_positions.row(i) - real.rx_positions.row(i)).norm();
      CHECK(d >= cfg.rx_distance_min);
      CHECK(d <= cfg.rx_distance_max);
    }
  }
}

TEST_CASE("unit fading reproduces the long-term gains") {
  GeometryConfig cfg;
  cfg.num_users = 4;
  cfg.seed = 7;
  const NetworkRealization real = generate_realization(cfg);
  const auto states = sample_fading_sequence(real, 1, 99, /*unit_fading=*/true);
  CHECK(states.size() == 1);
  CHECK(states[0].gain == real.long_term_gain);
}

TEST_CASE("fading sequences are deterministic and mean-one") {
  GeometryConfig cfg;
  cfg.num_users = 3;
  cfg.seed = 21;
  const NetworkRealization real = generate_realization(cfg);

  const auto a = sample_fading_sequence(real, 16, 5);
  const auto b = sample_fading_sequence(real, 16, 5);
  for (std::size_t t = 0; t < a.size(); ++t) CHECK(a[t].gain == b[t].gain);

  // law of large numbers on the fading factors, per entry: 3 sigma / sqrt(T)
  const int T = 10000;
  const auto seq = sample_fading_sequence(real, T, 5);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(3, 3);
  for (const auto& s : seq) mean += s.gain.cwiseQuotient(real.long_term_gain);
  mean /= static_cast<double>(T);
  const double tol = 3.0 / std::sqrt(static_cast<double>(T));
  CHECK(((mean.array() - 1.0).abs() <= tol).all());
}

TEST_CASE("exponential sampler has mean one") {
  Rng rng(42);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += rng.exponential();
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("fading sequence rejects empty horizons") {
  GeometryConfig cfg;
  cfg.num_users = 2;
  const NetworkRealization real = generate_realization(cfg);
  CHECK_THROWS_AS(sample_fading_sequence(real, 0, 1), ConfigError);
}
