#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace rrm {

// Log-domain squashing of channel gains into [-1, 1] edge weights:
//   e_ij = tanh((log10 G_ij - ref_gain_log10) / scale_decades).
// ref_gain_log10 is pinned to the median direct-link long-term gain of
// the training set at training time and travels with the checkpoint.
struct GraphNorm {
  double ref_gain_log10 = 0.0;
  double scale_decades = 3.0;
};

// Throws on non-positive gains.
Eigen::MatrixXd build_graph_edges(const Eigen::MatrixXd& gain, const GraphNorm& norm);

// Dense message-passing network over m nodes. Each layer computes
//   out_i = rho(W_self^T y_i + sum_{j != i} e_ji W_nbr^T y_j)
// with leaky-ReLU on hidden layers and a linear final layer. Weights are
// shared across nodes, so the network is permutation-equivariant.
class Mpnn {
 public:
  struct Layer {
    Eigen::MatrixXd w_self;  // d_in x d_out
    Eigen::MatrixXd w_nbr;   // d_in x d_out
  };

  // Everything forward() needs to replay the pass in backward().
  struct Cache {
    Eigen::MatrixXd edges;                 // m x m, diagonal excluded from aggregation
    std::vector<Eigen::MatrixXd> inputs;   // per-layer input features
    std::vector<Eigen::MatrixXd> pre;      // per-layer pre-activations
  };

  Mpnn() = default;

  // dims = {d_in, d_hidden..., d_out}; symmetric uniform fan-in init.
  static Mpnn create(const std::vector<int>& dims, std::uint64_t seed);
  static Mpnn zeros_like(const Mpnn& other);

  int input_dim() const { return static_cast<int>(layers_.front().w_self.rows()); }
  int output_dim() const { return static_cast<int>(layers_.back().w_self.cols()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  Eigen::Index param_count() const;
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);

  // Returns the final node scalars (pre-head). features is m x d_in.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& edges, const Eigen::MatrixXd& features,
                          Cache* cache = nullptr) const;

  // Accumulates d(loss)/d(weights) into grad given d(loss)/d(output).
  void backward(const Cache& cache, const Eigen::MatrixXd& d_output, Mpnn& grad) const;

  // this += scale * other, layerwise.
  void add_scaled(const Mpnn& other, double scale);

 private:
  std::vector<Layer> layers_;
};

double sigmoid(double z);
double softplus(double z);

// State-augmented power policy: node feature mu_i / mu_scale, output
// P_max * sigmoid(z_i).
struct PolicyNet {
  Mpnn net;
  GraphNorm norm;
  double p_max_watts = 0.01;
  double mu_scale = 1.0;

  Eigen::VectorXd forward(const Eigen::MatrixXd& gain, const Eigen::VectorXd& mu,
                          Mpnn::Cache* cache = nullptr) const;
  // d_power is dL/dp; accumulates into grad.
  void backward(const Mpnn::Cache& cache, const Eigen::VectorXd& d_power, Mpnn& grad) const;
};

// Dual regressor: constant dummy node feature, softplus output head.
struct RegressorNet {
  Mpnn net;
  GraphNorm norm;

  Eigen::VectorXd forward(const Eigen::MatrixXd& long_term_gain,
                          Mpnn::Cache* cache = nullptr) const;
  void backward(const Mpnn::Cache& cache, const Eigen::VectorXd& d_mu, Mpnn& grad) const;
};

}  // namespace rrm
