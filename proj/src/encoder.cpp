#include "drld/encoder.h"

#include "drld/error.h"

namespace drld {

Encoder::Encoder(int local_width, std::mt19937_64& rng)
    : global_net(kGlobalStateSize, kEncoderWidth, rng),
      local_net(local_width, kEncoderWidth, rng),
      score_net(2 * kEncoderWidth, 1, rng) {}

void Encoder::collect(const std::string& prefix, std::vector<TensorRef>& out) {
  global_net.collect(prefix + ".global", out);
  local_net.collect(prefix + ".local", out);
  score_net.collect(prefix + ".score", out);
}

Encoder Encoder::zeros_like() const {
  Encoder e;
  e.global_net = global_net.zeros_like();
  e.local_net = local_net.zeros_like();
  e.score_net = score_net.zeros_like();
  return e;
}

Eigen::VectorXd encoder_global_input(const RawState& raw) {
  Eigen::VectorXd x(kGlobalStateSize);
  for (int i = 0; i < kGlobalStateSize; ++i) x[i] = raw.global[static_cast<std::size_t>(i)];
  x[1] /= raw.minpts_scale;
  for (int i : {4, 5}) {
    if (x[i] != -1.0) x[i] /= raw.minpts_scale;
  }
  return x;
}

Eigen::MatrixXd encoder_local_input(const RawState& raw) {
  Eigen::MatrixXd x = raw.locals.transpose();
  if (x.cols() > 0) x.row(x.rows() - 1) /= raw.size_scale;
  return x;
}

Eigen::VectorXd encode(const RawState& raw, const Encoder& params, EncoderCache* cache, ReluTrace* trace) {
  if (raw.k() > 0 && raw.local_width() != params.local_width()) {
    throw Error("encoder expects local width " + std::to_string(params.local_width()) + ", got " +
                std::to_string(raw.local_width()));
  }
  EncoderCache local_cache;
  EncoderCache& c = cache ? *cache : local_cache;

  c.global_in = encoder_global_input(raw);
  c.local_in = encoder_local_input(raw);
  c.g = params.global_net.weight * c.global_in + params.global_net.bias;

  const Eigen::Index k = c.local_in.cols();
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(kEncoderWidth);
  if (k > 0) {
    c.h = params.local_net.weight * c.local_in;
    c.h.colwise() += params.local_net.bias;
    const auto w_g = params.score_net.weight.leftCols(kEncoderWidth);
    const auto w_h = params.score_net.weight.rightCols(kEncoderWidth);
    const double g_part = (w_g * c.g)(0) + params.score_net.bias(0);
    c.raw_score = (w_h * c.h).transpose().array() + g_part;
    if (trace) {
      for (Eigen::Index n = 0; n < k; ++n) trace->push_back(c.raw_score[n] > 0.0);
    }
    const Eigen::VectorXd shifted = c.raw_score.cwiseMax(0.0).array() + kAttentionFloor;
    c.alpha = shifted / shifted.sum();
    pooled = c.h * c.alpha;
  } else {
    c.h.resize(kEncoderWidth, 0);
    c.raw_score.resize(0);
    c.alpha.resize(0);
  }

  c.fused.resize(kStateSize);
  c.fused << c.g, pooled;
  if (trace) {
    for (Eigen::Index i = 0; i < c.fused.size(); ++i) trace->push_back(c.fused[i] > 0.0);
  }
  return c.fused.cwiseMax(0.0);
}

void encode_backward(const Encoder& params, const EncoderCache& c, const Eigen::VectorXd& upstream,
                     Encoder& grads) {
  const Eigen::VectorXd dz = upstream.cwiseProduct((c.fused.array() > 0.0).cast<double>().matrix());
  Eigen::VectorXd dg = dz.head(kEncoderWidth);
  const Eigen::VectorXd dpooled = dz.tail(kEncoderWidth);

  const Eigen::Index k = c.h.cols();
  if (k > 0) {
    // pooled = h alpha
    Eigen::MatrixXd dh = dpooled * c.alpha.transpose();
    const Eigen::VectorXd dalpha = c.h.transpose() * dpooled;
    // alpha_n = u_n / U with u_n = relu(s_n) + floor
    const double total = (c.raw_score.cwiseMax(0.0).array() + kAttentionFloor).sum();
    const double weighted = dalpha.dot(c.alpha);
    const Eigen::VectorXd du = (dalpha.array() - weighted) / total;
    const Eigen::VectorXd ds = du.cwiseProduct((c.raw_score.array() > 0.0).cast<double>().matrix());

    // s_n = w_g . g + w_h . h_n + b
    const auto w_g = params.score_net.weight.leftCols(kEncoderWidth);
    const auto w_h = params.score_net.weight.rightCols(kEncoderWidth);
    const double ds_sum = ds.sum();
    grads.score_net.weight.leftCols(kEncoderWidth) += ds_sum * c.g.transpose();
    grads.score_net.weight.rightCols(kEncoderWidth) += (c.h * ds).transpose();
    grads.score_net.bias(0) += ds_sum;
    dg += ds_sum * w_g.transpose();
    dh += w_h.transpose() * ds.transpose();

    grads.local_net.weight += dh * c.local_in.transpose();
    grads.local_net.bias += dh.rowwise().sum();
  }
  grads.global_net.weight += dg * c.global_in.transpose();
  grads.global_net.bias += dg;
}

Encoder encode_with_gradients(const RawState& raw, const Encoder& params, const Eigen::VectorXd& upstream) {
  if (upstream.size() != kStateSize) throw Error("upstream gradient must have length 64");
  EncoderCache cache;
  encode(raw, params, &cache);
  Encoder grads = params.zeros_like();
  encode_backward(params, cache, upstream, grads);
  return grads;
}

Eigen::VectorXd attention_weights(const RawState& raw, const Encoder& params) {
  EncoderCache cache;
  encode(raw, params, &cache);
  return cache.alpha;
}

}  // namespace drld
