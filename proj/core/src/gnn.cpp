#include "rrm/gnn.hpp"

#include <cmath>
#include <string>

#include "rrm/errors.hpp"
#include "rrm/rng.hpp"

namespace rrm {

namespace {

constexpr double kLeakySlope = 0.01;

double leaky_relu(double x) { return x >= 0.0 ? x : kLeakySlope * x; }
double leaky_relu_grad(double x) { return x >= 0.0 ? 1.0 : kLeakySlope; }

// Aggregation input: neighbors only, diagonal zeroed. agg = E_zd^T * X,
// so row i collects e_ji * x_j over j != i.
Eigen::MatrixXd neighbor_aggregate(const Eigen::MatrixXd& edges, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd e = edges;
  e.diagonal().setZero();
  return e.transpose() * x;
}

}  // namespace

Eigen::MatrixXd build_graph_edges(const Eigen::MatrixXd& gain, const GraphNorm& norm) {
  const Eigen::Index m = gain.rows();
  Eigen::MatrixXd edges(m, gain.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < gain.cols(); ++j) {
      const double g = gain(i, j);
      if (!(g > 0.0) || !std::isfinite(g))
        throw NumericError("build_graph_edges: non-positive gain at (" + std::to_string(i) +
                           ", " + std::to_string(j) + ")");
      edges(i, j) = std::tanh((std::log10(g) - norm.ref_gain_log10) / norm.scale_decades);
    }
  }
  return edges;
}

Mpnn Mpnn::create(const std::vector<int>& dims, std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("Mpnn: need at least input and output dims");
  Mpnn net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int d_in = dims[l];
    const int d_out = dims[l + 1];
    if (d_in < 1 || d_out < 1) throw ConfigError("Mpnn: layer dims must be >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
    Layer layer;
    layer.w_self.resize(d_in, d_out);
    layer.w_nbr.resize(d_in, d_out);
    Rng rng_self = Rng::substream(seed, {static_cast<std::uint64_t>(l), 0});
    Rng rng_nbr = Rng::substream(seed, {static_cast<std::uint64_t>(l), 1});
    for (int i = 0; i < d_in; ++i) {
      for (int j = 0; j < d_out; ++j) {
        layer.w_self(i, j) = rng_self.uniform(-bound, bound);
        layer.w_nbr(i, j) = rng_nbr.uniform(-bound, bound);
      }
    }
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

Mpnn Mpnn::zeros_like(const Mpnn& other) {
  Mpnn net;
  for (const auto& layer : other.layers_) {
    Layer z;
    z.w_self = Eigen::MatrixXd::Zero(layer.w_self.rows(), layer.w_self.cols());
    z.w_nbr = Eigen::MatrixXd::Zero(layer.w_nbr.rows(), layer.w_nbr.cols());
    net.layers_.push_back(std::move(z));
  }
  return net;
}

Eigen::Index Mpnn::param_count() const {
  Eigen::Index n = 0;
  for (const auto& layer : layers_) n += 2 * layer.w_self.size();
  return n;
}

Eigen::VectorXd Mpnn::flatten() const {
  Eigen::VectorXd flat(param_count());
  Eigen::Index at = 0;
  for (const auto& layer : layers_) {
    flat.segment(at, layer.w_self.size()) =
        Eigen::Map<const Eigen::VectorXd>(layer.w_self.data(), layer.w_self.size());
    at += layer.w_self.size();
    flat.segment(at, layer.w_nbr.size()) =
        Eigen::Map<const Eigen::VectorXd>(layer.w_nbr.data(), layer.w_nbr.size());
    at += layer.w_nbr.size();
  }
  return flat;
}

void Mpnn::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != param_count())
    throw ConfigError("Mpnn::unflatten: parameter vector length mismatch");
  Eigen::Index at = 0;
  for (auto& layer : layers_) {
    Eigen::Map<Eigen::VectorXd>(layer.w_self.data(), layer.w_self.size()) =
        flat.segment(at, layer.w_self.size());
    at += layer.w_self.size();
    Eigen::Map<Eigen::VectorXd>(layer.w_nbr.data(), layer.w_nbr.size()) =
        flat.segment(at, layer.w_nbr.size());
    at += layer.w_nbr.size();
  }
}

Eigen::MatrixXd Mpnn::forward(const Eigen::MatrixXd& edges, const Eigen::MatrixXd& features,
                              Cache* cache) const {
  if (features.cols() != input_dim())
    throw ConfigError("Mpnn::forward: feature width " + std::to_string(features.cols()) +
                      " != input dim " + std::to_string(input_dim()));
  if (edges.rows() != features.rows() || edges.cols() != features.rows())
    throw ConfigError("Mpnn::forward: edge matrix shape mismatch");

  if (cache) {
    cache->edges = edges;
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd x = features;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    Eigen::MatrixXd pre = x * layer.w_self + neighbor_aggregate(edges, x) * layer.w_nbr;
    if (cache) {
      cache->inputs.push_back(x);
      cache->pre.push_back(pre);
    }
    if (l + 1 < layers_.size()) {
      x = pre.unaryExpr([](double v) { return leaky_relu(v); });
    } else {
      x = std::move(pre);
    }
  }
  return x;
}

void Mpnn::backward(const Cache& cache, const Eigen::MatrixXd& d_output, Mpnn& grad) const {
  if (cache.inputs.size() != layers_.size())
    throw StateError("Mpnn::backward: cache does not match network depth");

  Eigen::MatrixXd e_zd = cache.edges;
  e_zd.diagonal().setZero();

  Eigen::MatrixXd dx = d_output;
  for (std::size_t idx = layers_.size(); idx-- > 0;) {
    const Layer& layer = layers_[idx];
    const Eigen::MatrixXd& x_in = cache.inputs[idx];
    Eigen::MatrixXd d_pre;
    if (idx + 1 == layers_.size()) {
      d_pre = dx;
    } else {
      d_pre = dx.cwiseProduct(
          cache.pre[idx].unaryExpr([](double v) { return leaky_relu_grad(v); }));
    }
    const Eigen::MatrixXd agg = e_zd.transpose() * x_in;
    grad.layers_[idx].w_self += x_in.transpose() * d_pre;
    grad.layers_[idx].w_nbr += agg.transpose() * d_pre;
    if (idx > 0) {
      dx = d_pre * layer.w_self.transpose() + e_zd * (d_pre * layer.w_nbr.transpose());
    }
  }
}

void Mpnn::add_scaled(const Mpnn& other, double scale) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].w_self += scale * other.layers_[l].w_self;
    layers_[l].w_nbr += scale * other.layers_[l].w_nbr;
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 30.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

Eigen::VectorXd PolicyNet::forward(const Eigen::MatrixXd& gain, const Eigen::VectorXd& mu,
                                   Mpnn::Cache* cache) const {
  const Eigen::MatrixXd edges = build_graph_edges(gain, norm);
  const Eigen::MatrixXd features = mu / mu_scale;
  const Eigen::MatrixXd z = net.forward(edges, features, cache);
  Eigen::VectorXd p(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) p(i) = p_max_watts * sigmoid(z(i, 0));
  return p;
}

void PolicyNet::backward(const Mpnn::Cache& cache, const Eigen::VectorXd& d_power,
                         Mpnn& grad) const {
  const Eigen::MatrixXd& z = cache.pre.back();
  Eigen::MatrixXd dz(z.rows(), 1);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double s = sigmoid(z(i, 0));
    dz(i, 0) = d_power(i) * p_max_watts * s * (1.0 - s);
  }
  net.backward(cache, dz, grad);
}

Eigen::VectorXd RegressorNet::forward(const Eigen::MatrixXd& long_term_gain,
                                      Mpnn::Cache* cache) const {
  const Eigen::MatrixXd edges = build_graph_edges(long_term_gain, norm);
  const Eigen::MatrixXd features = Eigen::MatrixXd::Ones(long_term_gain.rows(), 1);
  const Eigen::MatrixXd z = net.forward(edges, features, cache);
  Eigen::VectorXd mu(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) mu(i) = softplus(z(i, 0));
  return mu;
}

void RegressorNet::backward(const Mpnn::Cache& cache, const Eigen::VectorXd& d_mu,
                            Mpnn& grad) const {
  const Eigen::MatrixXd& z = cache.pre.back();
  Eigen::MatrixXd dz(z.rows(), 1);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    dz(i, 0) = d_mu(i) * sigmoid(z(i, 0));  // d softplus = sigmoid
  }
  net.backward(cache, dz, grad);
}

}  // namespace rrm
