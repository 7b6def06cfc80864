#include "drld/nn.h"

#include <cassert>
#include <cmath>

#include "drld/error.h"

namespace drld {

Dense::Dense(int in, int out, std::mt19937_64& rng) : weight(out, in), bias(Eigen::VectorXd::Zero(out)) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index c = 0; c < weight.cols(); ++c) {
    for (Eigen::Index r = 0; r < weight.rows(); ++r) weight(r, c) = dist(rng);
  }
}

void Dense::collect(const std::string& prefix, std::vector<TensorRef>& out) {
  out.push_back({prefix + ".weight", weight.data(), weight.rows(), weight.cols()});
  out.push_back({prefix + ".bias", bias.data(), bias.rows(), 1});
}

Dense Dense::zeros_like() const {
  Dense d;
  d.weight = Eigen::MatrixXd::Zero(weight.rows(), weight.cols());
  d.bias = Eigen::VectorXd::Zero(bias.rows());
  return d;
}

Mlp::Mlp(const std::vector<int>& sizes, std::mt19937_64& rng) {
  if (sizes.size() < 2) throw Error("an MLP needs at least input and output sizes");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) layers.emplace_back(sizes[i], sizes[i + 1], rng);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, MlpCache* cache, ReluTrace* trace) const {
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& layer = layers[i];
    Eigen::MatrixXd z = layer.weight * h;
    z.colwise() += layer.bias;
    if (cache) cache->inputs.push_back(std::move(h));
    const bool hidden = i + 1 < layers.size();
    if (hidden) {
      if (trace) {
        for (Eigen::Index k = 0; k < z.size(); ++k) trace->push_back(z.data()[k] > 0.0);
      }
      h = z.cwiseMax(0.0);
    } else {
      h = z;
    }
    if (cache) cache->pre.push_back(std::move(z));
  }
  return h;
}

Eigen::MatrixXd Mlp::backward(const MlpCache& cache, const Eigen::MatrixXd& dout, Mlp* grads) const {
  assert(cache.inputs.size() == layers.size());
  Eigen::MatrixXd delta = dout;
  for (std::size_t i = layers.size(); i-- > 0;) {
    if (i + 1 < layers.size()) {
      delta = delta.cwiseProduct((cache.pre[i].array() > 0.0).cast<double>().matrix());
    }
    if (grads) {
      grads->layers[i].weight.noalias() += delta * cache.inputs[i].transpose();
      grads->layers[i].bias += delta.rowwise().sum();
    }
    delta = layers[i].weight.transpose() * delta;
  }
  return delta;
}

void Mlp::collect(const std::string& prefix, std::vector<TensorRef>& out) {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].collect(prefix + "." + std::to_string(i), out);
}

Mlp Mlp::zeros_like() const {
  Mlp m;
  for (const auto& layer : layers) m.layers.push_back(layer.zeros_like());
  return m;
}

void SgdMomentum::step(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads) {
  if (params.size() != grads.size()) throw Error("optimizer: parameter/gradient count mismatch");
  if (velocity_.size() != params.size()) {
    velocity_.clear();
    for (const auto& p : params) velocity_.push_back(Eigen::VectorXd::Zero(p.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& v = velocity_[i];
    v = mu_ * v + grads[i].flat();
    params[i].flat() -= lr_ * v;
  }
}

void polyak_update(const std::vector<TensorRef>& target, const std::vector<TensorRef>& online, double tau) {
  if (target.size() != online.size()) throw Error("polyak: tensor count mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto t = target[i].flat();
    t = (1.0 - tau) * t + tau * online[i].flat();
  }
}

void zero(const std::vector<TensorRef>& tensors) {
  for (const auto& t : tensors) t.flat().setZero();
}

}  // namespace drld
