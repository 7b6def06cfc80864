#include "drld/agent.h"

#include <algorithm>
#include <cmath>

#include "drld/error.h"

namespace drld {

namespace {

std::vector<TensorRef> refs(Encoder& e) {
  std::vector<TensorRef> out;
  e.collect("encoder", out);
  return out;
}

std::vector<TensorRef> refs(Mlp& m, const std::string& name) {
  std::vector<TensorRef> out;
  m.collect(name, out);
  return out;
}

std::vector<TensorRef> critic_refs(Networks& n) {
  auto out = refs(n.critic1, "critic1");
  auto second = refs(n.critic2, "critic2");
  out.insert(out.end(), second.begin(), second.end());
  return out;
}

Eigen::MatrixXd one_hot(const std::vector<Action>& actions) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(kNumActions, static_cast<Eigen::Index>(actions.size()));
  for (std::size_t j = 0; j < actions.size(); ++j) out(static_cast<int>(actions[j]), static_cast<Eigen::Index>(j)) = 1.0;
  return out;
}

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  ++total_pushed_;
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[next_] = std::move(t);
  next_ = (next_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw Error("replay buffer index out of range");
  return items_[(next_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t m, std::mt19937_64& rng) const {
  if (items_.empty()) throw Error("cannot sample an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> out(m);
  for (auto& i : out) i = pick(rng);
  return out;
}

void ReplayBuffer::clear() {
  items_.clear();
  next_ = 0;
}

Networks::Networks(int local_width, int hidden, std::mt19937_64& rng)
    : encoder(local_width, rng),
      actor({kStateSize, hidden, hidden, kNumActions}, rng),
      critic1({kStateSize + kNumActions, hidden, hidden, 1}, rng),
      critic2({kStateSize + kNumActions, hidden, hidden, 1}, rng) {}

std::vector<TensorRef> Networks::tensors(const std::string& prefix) {
  std::vector<TensorRef> out;
  encoder.collect(prefix + "encoder", out);
  actor.collect(prefix + "actor", out);
  critic1.collect(prefix + "critic1", out);
  critic2.collect(prefix + "critic2", out);
  return out;
}

Networks Networks::zeros_like() const {
  Networks n;
  n.encoder = encoder.zeros_like();
  n.actor = actor.zeros_like();
  n.critic1 = critic1.zeros_like();
  n.critic2 = critic2.zeros_like();
  return n;
}

AgentBundle::AgentBundle(const AgentConfig& cfg, std::uint64_t seed)
    : config(cfg),
      buffer(cfg.buffer_capacity),
      encoder_opt(cfg.learning_rate, cfg.momentum),
      actor_opt(cfg.learning_rate, cfg.momentum),
      critic_opt(cfg.learning_rate, cfg.momentum),
      rng(seed) {
  online = Networks(cfg.local_width, cfg.hidden, rng);
  target = online;
}

double AgentBundle::exploration_epsilon() const {
  if (config.explore_decay_steps <= 0) return config.explore_end;
  const double t = std::min(1.0, static_cast<double>(env_steps) / config.explore_decay_steps);
  return config.explore_start + (config.explore_end - config.explore_start) * t;
}

Action greedy_action(const Eigen::VectorXd& logits) {
  int best = 0;
  for (int a = 1; a < kNumActions; ++a) {
    if (logits[a] > logits[best]) best = a;
  }
  return static_cast<Action>(best);
}

Eigen::VectorXd actor_logits(const RawState& state, const Networks& nets) {
  const Eigen::VectorXd z = encode(state, nets.encoder);
  return nets.actor.forward(z).col(0);
}

Action act_with_epsilon(const RawState& state, const AgentBundle& bundle, double epsilon, std::mt19937_64& rng) {
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<int> pick(0, kNumActions - 1);
      return static_cast<Action>(pick(rng));
    }
  }
  return greedy_action(actor_logits(state, bundle.online));
}

Action act(const RawState& state, const AgentBundle& bundle, bool explore, std::mt19937_64& rng) {
  return act_with_epsilon(state, bundle, explore ? bundle.exploration_epsilon() : 0.0, rng);
}

void store(AgentBundle& bundle, Transition t) { bundle.buffer.push(std::move(t)); }

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

double critic_loss(const Networks& online, const Networks& target, const Batch& batch, double gamma,
                   Networks* grads, bool encoder_grads, ReluTrace* trace) {
  const auto m = static_cast<Eigen::Index>(batch.size());
  if (m == 0) throw Error("empty batch");

  std::vector<EncoderCache> caches(batch.size());
  Eigen::MatrixXd z(kStateSize, m), z_next(kStateSize, m);
  std::vector<Action> actions(batch.size());
  Eigen::RowVectorXd rewards(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& t = *batch[static_cast<std::size_t>(j)];
    z.col(j) = encode(t.before, online.encoder, &caches[static_cast<std::size_t>(j)], trace);
    z_next.col(j) = encode(t.after, target.encoder);
    actions[static_cast<std::size_t>(j)] = t.action;
    rewards[j] = t.reward;
  }

  const Eigen::MatrixXd next_logits = target.actor.forward(z_next);
  std::vector<Action> next_actions(batch.size());
  for (Eigen::Index j = 0; j < m; ++j) next_actions[static_cast<std::size_t>(j)] = greedy_action(next_logits.col(j));
  const Eigen::MatrixXd x_next = stack(z_next, one_hot(next_actions));
  const Eigen::RowVectorXd q_next =
      target.critic1.forward(x_next).row(0).cwiseMin(target.critic2.forward(x_next).row(0));
  const Eigen::RowVectorXd y = rewards + gamma * q_next;

  const Eigen::MatrixXd x = stack(z, one_hot(actions));
  MlpCache c1, c2;
  const Eigen::RowVectorXd q1 = online.critic1.forward(x, &c1, trace).row(0);
  const Eigen::RowVectorXd q2 = online.critic2.forward(x, &c2, trace).row(0);
  const Eigen::RowVectorXd e1 = q1 - y;
  const Eigen::RowVectorXd e2 = q2 - y;
  const double loss = (e1.squaredNorm() + e2.squaredNorm()) / static_cast<double>(m);

  if (grads) {
    const Eigen::MatrixXd dx1 = online.critic1.backward(c1, (2.0 / static_cast<double>(m)) * e1, &grads->critic1);
    const Eigen::MatrixXd dx2 = online.critic2.backward(c2, (2.0 / static_cast<double>(m)) * e2, &grads->critic2);
    if (encoder_grads) {
      const Eigen::MatrixXd dz = dx1.topRows(kStateSize) + dx2.topRows(kStateSize);
      for (Eigen::Index j = 0; j < m; ++j) {
        encode_backward(online.encoder, caches[static_cast<std::size_t>(j)], dz.col(j), grads->encoder);
      }
    }
  }
  return loss;
}

double actor_loss(const Networks& online, const Batch& batch, Networks* grads, bool encoder_grads,
                  ReluTrace* trace) {
  const auto m = static_cast<Eigen::Index>(batch.size());
  if (m == 0) throw Error("empty batch");

  std::vector<EncoderCache> caches(batch.size());
  Eigen::MatrixXd z(kStateSize, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    z.col(j) = encode(batch[static_cast<std::size_t>(j)]->before, online.encoder,
                      &caches[static_cast<std::size_t>(j)], trace);
  }
  MlpCache ca, cc;
  const Eigen::MatrixXd logits = online.actor.forward(z, &ca, trace);
  Eigen::MatrixXd probs(kNumActions, m);
  for (Eigen::Index j = 0; j < m; ++j) probs.col(j) = softmax(logits.col(j));
  const Eigen::RowVectorXd q = online.critic1.forward(stack(z, probs), &cc, trace).row(0);
  const double loss = -q.mean();

  if (grads) {
    const Eigen::RowVectorXd dq = Eigen::RowVectorXd::Constant(m, -1.0 / static_cast<double>(m));
    const Eigen::MatrixXd dx = online.critic1.backward(cc, dq, nullptr);
    Eigen::MatrixXd dlogits(kNumActions, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::VectorXd p = probs.col(j);
      const Eigen::VectorXd dp = dx.col(j).tail(kNumActions);
      dlogits.col(j) = p.cwiseProduct((dp.array() - p.dot(dp)).matrix());
    }
    const Eigen::MatrixXd dz_actor = online.actor.backward(ca, dlogits, &grads->actor);
    if (encoder_grads) {
      const Eigen::MatrixXd dz = dx.topRows(kStateSize) + dz_actor;
      for (Eigen::Index j = 0; j < m; ++j) {
        encode_backward(online.encoder, caches[static_cast<std::size_t>(j)], dz.col(j), grads->encoder);
      }
    }
  }
  return loss;
}

UpdateResult update(AgentBundle& bundle, int batch_size, double gamma, double tau) {
  UpdateResult result;
  if (batch_size < 1 || bundle.buffer.size() < static_cast<std::size_t>(batch_size)) return result;

  const auto indices = bundle.buffer.sample(static_cast<std::size_t>(batch_size), bundle.rng);
  Batch batch;
  batch.reserve(indices.size());
  for (const auto i : indices) batch.push_back(&bundle.buffer.at(i));

  const bool joint = bundle.config.encoder_training == EncoderTraining::kJoint;
  Networks grads = bundle.online.zeros_like();
  result.critic_loss = critic_loss(bundle.online, bundle.target, batch, gamma, &grads, joint);
  bundle.critic_opt.step(critic_refs(bundle.online), critic_refs(grads));
  if (joint) bundle.encoder_opt.step(refs(bundle.online.encoder), refs(grads.encoder));
  ++bundle.updates;
  result.performed = true;

  if (bundle.updates % std::max(1, bundle.config.actor_delay) == 0) {
    Networks actor_grads = bundle.online.zeros_like();
    result.actor_loss = actor_loss(bundle.online, batch, &actor_grads, true);
    bundle.actor_opt.step(refs(bundle.online.actor, "actor"), refs(actor_grads.actor, "actor"));
    bundle.encoder_opt.step(refs(bundle.online.encoder), refs(actor_grads.encoder));
    polyak_update(bundle.target.tensors(), bundle.online.tensors(), tau);
  }
  return result;
}

}  // namespace drld
