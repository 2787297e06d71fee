#pragma once

// Feed-forward action-value network: rectifier hidden layers, linear output.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ransim/rng.hpp"

namespace ransim {

/// Weights and biases of every layer. Also used to hold gradients.
struct Parameters {
  std::vector<Eigen::MatrixXd> weights;  // layer l: dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;

  static Parameters zeros(const std::vector<std::size_t>& dims) {
    Parameters p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      p.weights.push_back(Eigen::MatrixXd::Zero(dims[l + 1], dims[l]));
      p.biases.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
    }
    return p;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  /// Visits every scalar in a fixed order: per layer, W row-major then b.
  template <typename Fn>
  void for_each(Fn&& fn) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
        for (Eigen::Index c = 0; c < weights[l].cols(); ++c) fn(weights[l](r, c));
      for (Eigen::Index r = 0; r < biases[l].size(); ++r) fn(biases[l](r));
    }
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    const_cast<Parameters*>(this)->for_each([&](double& v) { fn(static_cast<const double&>(v)); });
  }

  std::vector<double> flatten() const {
    std::vector<double> flat;
    flat.reserve(size());
    for_each([&](double v) { flat.push_back(v); });
    return flat;
  }

  bool all_finite() const {
    bool ok = true;
    for_each([&](double v) { ok = ok && std::isfinite(v); });
    return ok;
  }
};

class QNetwork {
 public:
  /// Zero-initialized network with layer widths `dims` (input first, output last).
  explicit QNetwork(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw std::invalid_argument("QNetwork needs at least input and output dims");
    for (std::size_t d : dims_)
      if (d == 0) throw std::invalid_argument("QNetwork layer widths must be positive");
    params_ = Parameters::zeros(dims_);
  }

  /// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  static QNetwork random(std::vector<std::size_t> dims, Rng& rng) {
    QNetwork net(std::move(dims));
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(net.dims_[l]));
      auto& W = net.params_.weights[l];
      for (Eigen::Index r = 0; r < W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = uniform_real(rng, -bound, bound);
      auto& b = net.params_.biases[l];
      for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = uniform_real(rng, -bound, bound);
    }
    return net;
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  std::size_t num_layers() const { return dims_.size() - 1; }

  Parameters& params() { return params_; }
  const Parameters& params() const { return params_; }

  bool same_architecture(const QNetwork& other) const { return dims_ == other.dims_; }

  Eigen::VectorXd forward(std::span<const double> obs) const {
    if (obs.size() != input_dim())
      throw std::invalid_argument("QNetwork::forward: expected " + std::to_string(input_dim()) +
                                  " inputs, got " + std::to_string(obs.size()));
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(obs.data(), obs.size());
    for (std::size_t l = 0; l < num_layers(); ++l) {
      x = params_.weights[l] * x + params_.biases[l];
      if (l + 1 < num_layers()) x = x.cwiseMax(0.0);
    }
    return x;
  }

  /// Column-batched forward pass: `inputs` is input_dim x n.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const {
    if (static_cast<std::size_t>(inputs.rows()) != input_dim())
      throw std::invalid_argument("QNetwork::forward_batch: input dimension mismatch");
    Eigen::MatrixXd x = inputs;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      Eigen::MatrixXd z = params_.weights[l] * x;
      z.colwise() += params_.biases[l];
      if (l + 1 < num_layers()) z = z.cwiseMax(0.0);
      x = std::move(z);
    }
    return x;
  }

  /// Gradient of sum_i 0.5 * coeff_i * (Q(x_i, a_i) - y_i)^2 with coefficient
  /// folded into `output_error`: output_error(a_i, i) = coeff_i * (Q - y).
  /// Only the selected output of each column carries error.
  Parameters backward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& output_error) const {
    // Recompute activations; networks here are small.
    std::vector<Eigen::MatrixXd> acts{inputs};
    for (std::size_t l = 0; l < num_layers(); ++l) {
      Eigen::MatrixXd z = params_.weights[l] * acts.back();
      z.colwise() += params_.biases[l];
      if (l + 1 < num_layers()) z = z.cwiseMax(0.0);
      acts.push_back(std::move(z));
    }
    Parameters grad = Parameters::zeros(dims_);
    Eigen::MatrixXd delta = output_error;
    for (std::size_t l = num_layers(); l-- > 0;) {
      grad.weights[l] = delta * acts[l].transpose();
      grad.biases[l] = delta.rowwise().sum();
      if (l > 0) {
        delta = params_.weights[l].transpose() * delta;
        delta = delta.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
      }
    }
    return grad;
  }

  /// theta <- theta - step * grad
  void apply_gradient(const Parameters& grad, double step) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
      params_.weights[l] -= step * grad.weights[l];
      params_.biases[l] -= step * grad.biases[l];
    }
  }

  /// FNV-1a over the raw parameter bytes; used to prove a network was not touched.
  std::uint64_t parameter_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    params_.for_each([&](double v) { h = fnv1a(&v, sizeof v, h); });
    return h;
  }

 private:
  std::vector<std::size_t> dims_;
  Parameters params_;
};

// Snapshot format (text, versioned):
//   ransim-qnetwork v1
//   dims <n> d0 d1 ... d(n-1)
//   <one parameter per line, %.17g, layer by layer: W row-major then b>
inline constexpr const char* kSnapshotMagic = "ransim-qnetwork";
inline constexpr int kSnapshotVersion = 1;

inline void write_snapshot(const QNetwork& net, std::ostream& os) {
  os << kSnapshotMagic << " v" << kSnapshotVersion << "\n";
  os << "dims " << net.dims().size();
  for (std::size_t d : net.dims()) os << ' ' << d;
  os << "\n";
  os << std::setprecision(17);
  net.params().for_each([&](double v) { os << v << "\n"; });
}

inline QNetwork read_snapshot(std::istream& is) {
  std::string magic, version;
  if (!(is >> magic >> version) || magic != kSnapshotMagic)
    throw std::runtime_error("snapshot: bad header");
  if (version != "v" + std::to_string(kSnapshotVersion))
    throw std::runtime_error("snapshot: unsupported version " + version);
  std::string tag;
  std::size_t n = 0;
  if (!(is >> tag >> n) || tag != "dims" || n < 2 || n > 64)
    throw std::runtime_error("snapshot: bad dims line");
  std::vector<std::size_t> dims(n);
  for (auto& d : dims)
    if (!(is >> d) || d == 0 || d > (1u << 20)) throw std::runtime_error("snapshot: bad layer width");
  QNetwork net(dims);
  std::size_t read = 0;
  bool ok = true;
  net.params().for_each([&](double& v) {
    if (ok && (is >> v))
      ++read;
    else
      ok = false;
  });
  if (!ok || read != net.params().size())
    throw std::runtime_error("snapshot: truncated parameter list");
  return net;
}

inline void save_snapshot(const QNetwork& net, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_snapshot(net, os);
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

inline QNetwork load_snapshot(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_snapshot(is);
}

}  // namespace ransim
