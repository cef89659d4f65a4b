#pragma once

#include <Eigen/Dense>

namespace rrm {

// Every transmitter at maximum power.
Eigen::VectorXd full_reuse(int num_users, double p_max_watts);

struct ITLinQConfig {
  double threshold_db = 25.0;  // M
  double snr_exponent = 0.7;   // eta in (0, 1]
  void validate() const;
};

// Greedy information-theoretic link scheduling: links sorted by direct
// SNR; a link joins the active set iff its incoming and outgoing INRs are
// dominated by M_lin * SNR^eta against every already-admitted link.
// Returns a power vector with entries in {0, P_max}.
Eigen::VectorXd itlinq_schedule(const Eigen::MatrixXd& long_term_gain, double noise_watts,
                                double p_max_watts, const ITLinQConfig& cfg = {});

}  // namespace rrm
