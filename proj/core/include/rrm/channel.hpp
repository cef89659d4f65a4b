#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace rrm {

// Two-segment power-law path loss, continuous at the breakpoint.
struct PathlossParams {
  double ref_distance = 1.0;    // d0, meters
  double ref_gain = 1.0;        // linear gain at d0
  double exponent_near = 2.0;   // slope below the breakpoint
  double exponent_far = 4.0;    // slope above the breakpoint
  double break_distance = 50.0; // meters
};

enum class DensityMode { kFixed, kVariable };

struct GeometryConfig {
  int num_users = 6;                 // m transmitter-receiver pairs
  DensityMode density = DensityMode::kFixed;
  double rx_distance_min = 10.0;     // receiver annulus, meters
  double rx_distance_max = 200.0;
  double shadowing_sigma_db = 7.0;   // log-normal shadowing std dev; 0 disables
  PathlossParams pathloss;
  std::uint64_t seed = 0;

  // Fixed density: R = sqrt(m/20) * 1000 m. Variable density: R = 500 m.
  double area_radius() const;
  void validate() const;  // throws ConfigError naming the offending field
};

// One network draw: geometry plus the slow-fading (long-term) gain matrix.
// long_term_gain(i, j) is the linear power gain from transmitter i to
// receiver j.
struct NetworkRealization {
  Eigen::MatrixXd tx_positions;   // m x 2, meters
  Eigen::MatrixXd rx_positions;   // m x 2, meters
  Eigen::MatrixXd long_term_gain; // m x m, strictly positive
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(long_term_gain.rows()); }
};

// Instantaneous gain matrix: long-term gain times the fast-fading power.
struct NetworkState {
  int t = 0;
  Eigen::MatrixXd gain;  // m x m
};

double pathloss_gain(double distance, const PathlossParams& params = {});

NetworkRealization generate_realization(const GeometryConfig& cfg);

// Fast fading is i.i.d. Exponential(1) per entry and step (Rayleigh in
// amplitude). unit_fading forces all fading factors to 1 (test hook and
// time-invariant-channel mode).
std::vector<NetworkState> sample_fading_sequence(const NetworkRealization& real,
                                                 int num_steps,
                                                 std::uint64_t seed,
                                                 bool unit_fading = false);

}  // namespace rrm
