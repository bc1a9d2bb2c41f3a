#pragma once

#include <functional>
#include <optional>

#include "rollforge/policy.hpp"
#include "rollforge/tokenizer.hpp"

namespace rollforge::rl {

struct Transition {
  env::EnvState s;
  env::EnvState s_next;
  int action = 0;
  float reward = 0.0f;
  bool done = false;  // true only at a success-terminal step (timeouts bootstrap)
  int goal_id = 0;    // index into TransitionPool::goal_tokens
};

struct TransitionPool {
  std::vector<Transition> transitions;
  std::vector<std::vector<int>> goal_tokens;

  bool empty() const { return transitions.empty(); }
  size_t size() const { return transitions.size(); }

  static TransitionPool from_episodes(const std::vector<env::Episode>& episodes,
                                      const text::Vocabulary& vocab);
};

// A sampled batch entry points at its pool so mixed batches can span sources.
struct BatchRef {
  const TransitionPool* pool = nullptr;
  size_t index = 0;
  const Transition& get() const { return pool->transitions[index]; }
};

// Exactly ceil(ratio * batch) real entries, the rest imaginary; all real when
// the imaginary pool is empty (baseline mode). Throws when both are empty.
std::vector<BatchRef> mixed_batch_sampler(const TransitionPool& real,
                                          const TransitionPool& imaginary, int batch,
                                          double ratio, Rng& rng);

struct RlTrainConfig {
  int epochs = 10;
  int steps_per_epoch = 0;  // 0 = ceil(pool size / batch)
  int batch_size = 100;     // BC 100, CQL 32
  double lr = 1e-3;         // BC 1e-3, CQL 6.25e-5
  double gamma = 0.99;
  double cql_alpha = 10.0;
  double polyak = 0.005;
  double imitation_weight = 0.5;  // scales the BC objective
  double mix_ratio = 0.5;
  uint64_t seed = 1;

  void validate() const {
    if (epochs < 0 || batch_size <= 0 || lr <= 0) throw ConfigError("bad rl train config");
    if (gamma <= 0 || gamma >= 1) throw ConfigError("gamma must be in (0,1)");
    if (cql_alpha < 0) throw ConfigError("cql_alpha must be >= 0");
    if (mix_ratio < 0 || mix_ratio > 1) throw ConfigError("mix_ratio must be in [0,1]");
  }
};

struct RlEpochLog {
  int epoch = 0;
  double loss = 0.0;          // BC: mean NLL; CQL: TD + alpha * conservative
  double td = 0.0;            // CQL only
  double conservative = 0.0;  // CQL only; non-negative on every batch
  std::optional<double> eval_success;
};

using RlEpochHook = std::function<void(int epoch, PolicyNet<float>&, RlEpochLog&)>;

// Behavior cloning: categorical NLL of dataset actions given (state, goal).
std::vector<RlEpochLog> bc_train(PolicyNet<float>& policy, const TransitionPool& real,
                                 const TransitionPool& imaginary, const RlTrainConfig& cfg,
                                 const RlEpochHook& hook = nullptr);

// Discrete conservative Q-learning: twin Q heads, Polyak-averaged target
// network, logsumexp-minus-data conservative term. Requires rewards.
std::vector<RlEpochLog> cql_train(PolicyNet<float>& policy, const TransitionPool& real,
                                  const TransitionPool& imaginary, const RlTrainConfig& cfg,
                                  const RlEpochHook& hook = nullptr);

// Per-sample losses shared by the trainers and the gradient checks; when
// grad_scale > 0 the parameter gradients of grad_scale * loss accumulate.

template <class S>
S bc_sample_loss(PolicyNet<S>& net, const env::EnvState& s, const std::vector<int>& tokens,
                 int action, S grad_scale) {
  const nn::Vec<S> feat = net.trunk_features(s, tokens);
  const nn::Vec<S> logits = net.policy_logits_cached(feat);
  nn::Vec<S> dlogits;
  const S nll = nn::softmax_cross_entropy(logits, action, &dlogits);
  if (grad_scale > S(0)) net.trunk_backward(net.policy_backward(dlogits * grad_scale));
  return nll;
}

template <class S>
struct CqlSampleLoss {
  S td = S(0);
  S conservative = S(0);
};

// TD toward a fixed target y plus the logsumexp-minus-data term on each twin.
template <class S>
CqlSampleLoss<S> cql_sample_loss(PolicyNet<S>& net, const env::EnvState& s,
                                 const std::vector<int>& tokens, int action, S y, S alpha,
                                 S grad_scale) {
  const nn::Vec<S> feat = net.trunk_features(s, tokens);
  const nn::Vec<S> q1 = net.q1_cached(feat);
  const nn::Vec<S> q2 = net.q2_cached(feat);
  auto logsumexp = [](const nn::Vec<S>& v) {
    const S mx = v.maxCoeff();
    return mx + std::log((v.array() - mx).exp().sum());
  };
  CqlSampleLoss<S> out;
  const S d1 = q1(action) - y;
  const S d2 = q2(action) - y;
  out.td = S(0.5) * (d1 * d1 + d2 * d2);
  // summed over the twin critics; loss = td + alpha * conservative
  out.conservative = (logsumexp(q1) - q1(action)) + (logsumexp(q2) - q2(action));
  if (grad_scale > S(0)) {
    nn::Vec<S> dq1 = nn::softmax(q1) * alpha;
    nn::Vec<S> dq2 = nn::softmax(q2) * alpha;
    dq1(action) += d1 - alpha;
    dq2(action) += d2 - alpha;
    net.trunk_backward(net.q_backward(dq1 * grad_scale, dq2 * grad_scale));
  }
  return out;
}

enum class PolicyAlgo : int { Bc = 0, Cql = 1 };

const char* algo_name(PolicyAlgo a);
PolicyAlgo algo_from_name(const std::string& s);

// Greedy action: argmax policy logits (BC) or argmax min(Q1, Q2) (CQL); ties
// resolve to the lowest index.
int act(const PolicyNet<float>& policy, PolicyAlgo algo, const env::EnvState& s,
        const std::vector<int>& goal_tokens);
int act_with_feature(const PolicyNet<float>& policy, PolicyAlgo algo, const env::EnvState& s,
                     const nn::Vec<float>& goal_feature);

}  // namespace rollforge::rl
