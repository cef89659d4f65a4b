#include "rrm/channel.hpp"

#include <cmath>
#include <string>

#include "rrm/errors.hpp"
#include "rrm/rng.hpp"

namespace rrm {

double GeometryConfig::area_radius() const {
  if (density == DensityMode::kFixed) {
    return std::sqrt(static_cast<double>(num_users) / 20.0) * 1000.0;
  }
  return 500.0;
}

void GeometryConfig::validate() const {
  if (num_users < 1) throw ConfigError("geometry.num_users must be >= 1");
  if (!(area_radius() > 0.0)) throw ConfigError("geometry.area_radius must be > 0");
  if (!(rx_distance_min > 0.0)) throw ConfigError("geometry.rx_distance_min must be > 0");
  if (!(rx_distance_min < rx_distance_max))
    throw ConfigError("geometry.rx_distance_min must be < rx_distance_max");
  if (!(rx_distance_max < area_radius()))
    throw ConfigError("geometry.rx_distance_max must be < area_radius");
  if (shadowing_sigma_db < 0.0) throw ConfigError("geometry.shadowing_sigma_db must be >= 0");
  if (!(pathloss.ref_distance > 0.0)) throw ConfigError("pathloss.ref_distance must be > 0");
  if (!(pathloss.break_distance > 0.0)) throw ConfigError("pathloss.break_distance must be > 0");
  if (!(pathloss.ref_gain > 0.0)) throw ConfigError("pathloss.ref_gain must be > 0");
}

double pathloss_gain(double distance, const PathlossParams& params) {
  if (!(distance > 0.0)) throw NumericError("pathloss: distance must be > 0");
  const double d0 = params.ref_distance;
  if (distance <= params.break_distance) {
    return params.ref_gain * std::pow(distance / d0, -params.exponent_near);
  }
  const double gain_at_break =
      params.ref_gain * std::pow(params.break_distance / d0, -params.exponent_near);
  return gain_at_break * std::pow(distance / params.break_distance, -params.exponent_far);
}

NetworkRealization generate_realization(const GeometryConfig& cfg) {
  cfg.validate();
  const int m = cfg.num_users;
  const double radius = cfg.area_radius();
  constexpr double kTwoPi = 6.283185307179586476925286766559;

  Rng pos_rng = Rng::substream(cfg.seed, {0});
  Rng shadow_rng = Rng::substream(cfg.seed, {1});

  NetworkRealization real;
  real.seed = cfg.seed;
  real.tx_positions.resize(m, 2);
  real.rx_positions.resize(m, 2);
  for (int i = 0; i < m; ++i) {
    const double r = radius * std::sqrt(pos_rng.uniform());
    const double theta = kTwoPi * pos_rng.uniform();
    real.tx_positions(i, 0) = r * std::cos(theta);
    real.tx_positions(i, 1) = r * std::sin(theta);

    // Receiver uniform (by area) in the annulus around its transmitter.
    const double lo2 = cfg.rx_distance_min * cfg.rx_distance_min;
    const double hi2 = cfg.rx_distance_max * cfg.rx_distance_max;
    const double d = std::sqrt(lo2 + (hi2 - lo2) * pos_rng.uniform());
    const double phi = kTwoPi * pos_rng.uniform();
    real.rx_positions(i, 0) = real.tx_positions(i, 0) + d * std::cos(phi);
    real.rx_positions(i, 1) = real.tx_positions(i, 1) + d * std::sin(phi);
  }

  real.long_term_gain.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double dist = (real.tx_positions.row(i) - real.rx_positions.row(j)).norm();
      double gain = pathloss_gain(dist, cfg.pathloss);
      if (cfg.shadowing_sigma_db > 0.0) {
        const double shadow_db = cfg.shadowing_sigma_db * shadow_rng.normal();
        gain *= std::pow(10.0, shadow_db / 10.0);
      }
      if (!(gain > 0.0) || !std::isfinite(gain)) {
        throw NumericError("generate_realization: non-finite gain at (" + std::to_string(i) +
                           ", " + std::to_string(j) + ")");
      }
      real.long_term_gain(i, j) = gain;
    }
  }
  return real;
}

std::vector<NetworkState> sample_fading_sequence(const NetworkRealization& real,
                                                 int num_steps,
                                                 std::uint64_t seed,
                                                 bool unit_fading) {
  if (num_steps < 1) throw ConfigError("sample_fading_sequence: num_steps must be >= 1");
  const int m = real.size();
  std::vector<NetworkState> states(static_cast<std::size_t>(num_steps));
  Rng rng = Rng::substream(seed, {2});
  for (int t = 0; t < num_steps; ++t) {
    NetworkState& state = states[static_cast<std::size_t>(t)];
    state.t = t;
    state.gain.resize(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double fade = unit_fading ? 1.0 : rng.exponential();
        state.gain(i, j) = real.long_term_gain(i, j) * fade;
      }
    }
  }
  return states;
}

}  // namespace rrm
