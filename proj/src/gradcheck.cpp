#include "drld/gradcheck.h"

#include <cmath>
#include <functional>
#include <random>

#include "drld/agent.h"
#include "drld/encoder.h"

namespace drld {

namespace {

using LossFn = std::function<double(ReluTrace*)>;

RawState random_state(int dims, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> clusters(0, 5);
  RawState s;
  s.minpts_scale = 50.0;
  s.size_scale = 200.0;
  s.global = {u(rng) * std::sqrt(dims), 1.0 + std::floor(u(rng) * 50.0), u(rng), u(rng), u(rng) * 20.0,
              u(rng) * 20.0, u(rng) * 0.05};
  if (u(rng) < 0.2) s.global[2 + static_cast<std::size_t>(u(rng) * 4.0)] = -1.0;
  const int k = clusters(rng);
  s.locals.resize(k, dims + 2);
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < dims; ++j) s.locals(c, j) = u(rng);
    s.locals(c, dims) = u(rng) * std::sqrt(dims);
    s.locals(c, dims + 1) = 1.0 + std::floor(u(rng) * 100.0);
  }
  return s;
}

std::vector<Transition> random_batch(const GradcheckOptions& o, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> action(0, kNumActions - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Transition> out;
  for (int i = 0; i < o.batch_size; ++i) {
    out.push_back({random_state(o.dims, rng), static_cast<Action>(action(rng)), random_state(o.dims, rng), u(rng)});
  }
  return out;
}

void probe(GradcheckSuite& suite, const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads,
           const LossFn& loss, const GradcheckOptions& o, std::mt19937_64& rng) {
  ReluTrace base;
  loss(&base);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t].flat();
    const auto g = grads[t].flat();
    std::uniform_int_distribution<Eigen::Index> pick(0, p.size() - 1);
    for (int n = 0; n < o.probes_per_tensor; ++n) {
      const Eigen::Index i = pick(rng);
      const double saved = p[i];
      ReluTrace plus_trace, minus_trace;
      p[i] = saved + o.step;
      const double plus = loss(&plus_trace);
      p[i] = saved - o.step;
      const double minus = loss(&minus_trace);
      p[i] = saved;
      if (plus_trace != base || minus_trace != base) {
        ++suite.skipped;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * o.step);
      const double analytic = g[i];
      const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), o.floor});
      ++suite.probes;
      if (rel > suite.max_rel_error) {
        suite.max_rel_error = rel;
        suite.worst = params[t].name + "[" + std::to_string(i) + "]";
      }
    }
  }
}

std::vector<TensorRef> encoder_refs(Encoder& e) {
  std::vector<TensorRef> out;
  e.collect("encoder", out);
  return out;
}

std::vector<TensorRef> mlp_refs(Mlp& m, const std::string& name) {
  std::vector<TensorRef> out;
  m.collect(name, out);
  return out;
}

template <typename... Lists>
std::vector<TensorRef> join(Lists... lists) {
  std::vector<TensorRef> out;
  (out.insert(out.end(), lists.begin(), lists.end()), ...);
  return out;
}

}  // namespace

bool GradcheckReport::passed() const {
  for (const auto& s : suites) {
    if (!s.passed()) return false;
  }
  return !suites.empty();
}

GradcheckReport run_gradcheck(const GradcheckOptions& o) {
  std::mt19937_64 rng(o.seed);
  GradcheckSuite enc, actor, critic;
  enc.name = "encoder";
  actor.name = "actor";
  critic.name = "critic";
  for (auto* s : {&enc, &actor, &critic}) s->tolerance = o.tolerance;

  for (int b = 0; b < o.batches; ++b) {
    Networks online(o.dims + 2, o.hidden, rng);
    Networks target(o.dims + 2, o.hidden, rng);
    const auto transitions = random_batch(o, rng);
    Batch batch;
    for (const auto& t : transitions) batch.push_back(&t);

    // Encoder: L = sum_j u_j . encode(s_j)
    {
      std::normal_distribution<double> n(0.0, 1.0);
      std::vector<Eigen::VectorXd> upstream;
      for (std::size_t j = 0; j < transitions.size(); ++j) {
        upstream.push_back(Eigen::VectorXd::NullaryExpr(kStateSize, [&] { return n(rng); }));
      }
      Encoder grads = online.encoder.zeros_like();
      for (std::size_t j = 0; j < transitions.size(); ++j) {
        EncoderCache cache;
        encode(transitions[j].before, online.encoder, &cache);
        encode_backward(online.encoder, cache, upstream[j], grads);
      }
      const LossFn loss = [&](ReluTrace* trace) {
        double total = 0.0;
        for (std::size_t j = 0; j < transitions.size(); ++j) {
          total += upstream[j].dot(encode(transitions[j].before, online.encoder, nullptr, trace));
        }
        return total;
      };
      probe(enc, encoder_refs(online.encoder), encoder_refs(grads), loss, o, rng);
    }

    {
      Networks grads = online.zeros_like();
      critic_loss(online, target, batch, 0.1, &grads, true);
      const LossFn loss = [&](ReluTrace* trace) { return critic_loss(online, target, batch, 0.1, nullptr, true, trace); };
      probe(critic,
            join(encoder_refs(online.encoder), mlp_refs(online.critic1, "critic1"), mlp_refs(online.critic2, "critic2")),
            join(encoder_refs(grads.encoder), mlp_refs(grads.critic1, "critic1"), mlp_refs(grads.critic2, "critic2")),
            loss, o, rng);
    }

    {
      Networks grads = online.zeros_like();
      actor_loss(online, batch, &grads, true);
      const LossFn loss = [&](ReluTrace* trace) { return actor_loss(online, batch, nullptr, true, trace); };
      probe(actor, join(encoder_refs(online.encoder), mlp_refs(online.actor, "actor")),
            join(encoder_refs(grads.encoder), mlp_refs(grads.actor, "actor")), loss, o, rng);
    }
  }
  return {{enc, actor, critic}};
}

}  // namespace drld
