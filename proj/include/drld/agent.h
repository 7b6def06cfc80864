#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drld/encoder.h"
#include "drld/mdp.h"
#include "drld/nn.h"

namespace drld {

// Which losses train the shared state encoder.
enum class EncoderTraining { kJoint, kActorOnly };

struct AgentConfig {
  int local_width = 4;  // d + 2
  int hidden = 256;
  double learning_rate = 3e-4;
  double momentum = 0.9;
  double gamma = 0.1;
  double tau = 0.005;
  int batch_size = 16;
  int actor_delay = 2;
  std::size_t buffer_capacity = 10000;
  double explore_start = 0.9;
  double explore_end = 0.1;
  int explore_decay_steps = 200;
  EncoderTraining encoder_training = EncoderTraining::kJoint;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  // Overwrites the oldest entry once full.
  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::int64_t total_pushed() const { return total_pushed_; }
  // i = 0 is the oldest retained transition.
  const Transition& at(std::size_t i) const;
  // Uniform draws with replacement.
  std::vector<std::size_t> sample(std::size_t m, std::mt19937_64& rng) const;
  void clear();

 private:
  std::vector<Transition> items_;
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::int64_t total_pushed_ = 0;
};

// Encoder, actor (64 -> 256 -> 256 -> 5 logits) and twin critics
// ((64 + 5) -> 256 -> 256 -> 1).
struct Networks {
  Encoder encoder;
  Mlp actor;
  Mlp critic1;
  Mlp critic2;

  Networks() = default;
  Networks(int local_width, int hidden, std::mt19937_64& rng);

  std::vector<TensorRef> tensors(const std::string& prefix = "");
  Networks zeros_like() const;
};

struct AgentBundle {
  AgentBundle(const AgentConfig& config, std::uint64_t seed);

  // Training-mode environment steps taken; drives the exploration schedule.
  double exploration_epsilon() const;

  AgentConfig config;
  Networks online;
  Networks target;
  ReplayBuffer buffer;
  SgdMomentum encoder_opt, actor_opt, critic_opt;
  std::int64_t env_steps = 0;
  std::int64_t updates = 0;
  std::mt19937_64 rng;
};

// Index of the largest logit; ties go to the lowest action index.
Action greedy_action(const Eigen::VectorXd& logits);

Eigen::VectorXd actor_logits(const RawState& state, const Networks& nets);

// Greedy unless `explore`, in which case a uniformly random action is taken
// with probability bundle.exploration_epsilon().
Action act(const RawState& state, const AgentBundle& bundle, bool explore, std::mt19937_64& rng);
Action act_with_epsilon(const RawState& state, const AgentBundle& bundle, double epsilon, std::mt19937_64& rng);

void store(AgentBundle& bundle, Transition t);

struct UpdateResult {
  bool performed = false;
  double critic_loss = 0.0;
  std::optional<double> actor_loss;
};

// One optimization step on a sampled minibatch. No-op (performed = false) when
// the buffer holds fewer than `batch_size` transitions.
UpdateResult update(AgentBundle& bundle, int batch_size, double gamma, double tau);

using Batch = std::vector<const Transition*>;

// Sum over both critics of the mean squared TD error. The target is
// r + gamma * min(Q1', Q2')(s', onehot(argmax actor'(s'))). Gradients w.r.t.
// the critics and (if `encoder_grads`) the online encoder are added to `grads`.
double critic_loss(const Networks& online, const Networks& target, const Batch& batch, double gamma,
                   Networks* grads, bool encoder_grads = true, ReluTrace* trace = nullptr);

// -mean Q1(s, softmax(actor(s))). Gradients go to the actor and (if
// `encoder_grads`) the encoder; critic gradients are not accumulated.
double actor_loss(const Networks& online, const Batch& batch, Networks* grads, bool encoder_grads = true,
                  ReluTrace* trace = nullptr);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace drld
