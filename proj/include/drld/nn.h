#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace drld {

// Named view of one parameter tensor (row-major order is not assumed; `data`
// points at Eigen's column-major storage).
struct TensorRef {
  std::string name;
  double* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
  Eigen::Map<Eigen::VectorXd> flat() const { return {data, size()}; }
};

// Records ReLU on/off decisions of a forward pass. Finite-difference checks use
// it to detect probes that cross a kink.
using ReluTrace = std::vector<char>;

struct Dense {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;

  Dense() = default;
  // Uniform(+-sqrt(6 / (in + out))) weights, zero bias.
  Dense(int in, int out, std::mt19937_64& rng);

  int in() const { return static_cast<int>(weight.cols()); }
  int out() const { return static_cast<int>(weight.rows()); }

  void collect(const std::string& prefix, std::vector<TensorRef>& out);
  Dense zeros_like() const;
};

struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
};

// Fully connected stack with ReLU between layers and a linear output.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<int>& sizes, std::mt19937_64& rng);

  // Columns are samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, MlpCache* cache = nullptr,
                          ReluTrace* trace = nullptr) const;
  // Accumulates parameter gradients into `grads` and returns dL/dx.
  Eigen::MatrixXd backward(const MlpCache& cache, const Eigen::MatrixXd& dout, Mlp* grads) const;

  void collect(const std::string& prefix, std::vector<TensorRef>& out);
  Mlp zeros_like() const;

  int input_size() const { return layers.front().in(); }
  int output_size() const { return layers.back().out(); }

  std::vector<Dense> layers;
};

// SGD with (PyTorch-style) momentum: v = mu v + g; w -= lr v.
class SgdMomentum {
 public:
  SgdMomentum() = default;
  SgdMomentum(double learning_rate, double momentum) : lr_(learning_rate), mu_(momentum) {}

  // `params` and `grads` must list tensors in the same order each call.
  void step(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads);

  std::vector<Eigen::VectorXd>& velocity() { return velocity_; }
  const std::vector<Eigen::VectorXd>& velocity() const { return velocity_; }

 private:
  double lr_ = 3e-4;
  double mu_ = 0.9;
  std::vector<Eigen::VectorXd> velocity_;
};

// target = (1 - tau) target + tau online, tensor by tensor.
void polyak_update(const std::vector<TensorRef>& target, const std::vector<TensorRef>& online, double tau);

void zero(const std::vector<TensorRef>& tensors);

}  // namespace drld
