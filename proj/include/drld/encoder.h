#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drld/mdp.h"
#include "drld/nn.h"

namespace drld {

inline constexpr int kEncoderWidth = 32;
inline constexpr int kStateSize = 2 * kEncoderWidth;
inline constexpr double kAttentionFloor = 1e-8;

// Global/local fully connected branches fused by attention pooling:
//   g = F_G(global), h_n = F_L(local_n), score_n = relu(F_S(g || h_n))
//   alpha_n = (score_n + floor) / sum_m (score_m + floor)
//   out = relu(g || sum_n alpha_n h_n)
struct Encoder {
  Dense global_net;  // 7 -> 32
  Dense local_net;   // (d+2) -> 32
  Dense score_net;   // 64 -> 1

  Encoder() = default;
  Encoder(int local_width, std::mt19937_64& rng);

  int local_width() const { return local_net.in(); }
  void collect(const std::string& prefix, std::vector<TensorRef>& out);
  Encoder zeros_like() const;
};

struct EncoderCache {
  Eigen::VectorXd global_in;
  Eigen::MatrixXd local_in;  // (d+2) x k
  Eigen::VectorXd g;
  Eigen::MatrixXd h;         // 32 x k
  Eigen::VectorXd raw_score; // pre-ReLU scores
  Eigen::VectorXd alpha;
  Eigen::VectorXd fused;     // pre-ReLU concatenation
};

// Encoder inputs: MinPts-valued entries are divided by `minpts_scale` and
// cluster sizes by `size_scale`; a clamped boundary distance stays -1.
Eigen::VectorXd encoder_global_input(const RawState& raw);
Eigen::MatrixXd encoder_local_input(const RawState& raw);

Eigen::VectorXd encode(const RawState& raw, const Encoder& params, EncoderCache* cache = nullptr,
                       ReluTrace* trace = nullptr);

// Adds dL/dparams to `grads` given dL/d(encode output).
void encode_backward(const Encoder& params, const EncoderCache& cache, const Eigen::VectorXd& upstream,
                     Encoder& grads);

// Convenience: forward then backward; returns the parameter gradients.
Encoder encode_with_gradients(const RawState& raw, const Encoder& params, const Eigen::VectorXd& upstream);

// Attention weights for a state (empty when k = 0).
Eigen::VectorXd attention_weights(const RawState& raw, const Encoder& params);

}  // namespace drld
