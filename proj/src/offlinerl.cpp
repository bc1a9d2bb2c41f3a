#include "rollforge/offlinerl.hpp"

#include <cmath>

namespace rollforge::rl {

TransitionPool TransitionPool::from_episodes(const std::vector<env::Episode>& episodes,
                                             const text::Vocabulary& vocab) {
  TransitionPool pool;
  for (const auto& ep : episodes) {
    ep.check_invariants();
    const int goal_id = static_cast<int>(pool.goal_tokens.size());
    pool.goal_tokens.push_back(text::tokenize(ep.goal.text, vocab));
    for (int t = 0; t < ep.length(); ++t) {
      Transition tr;
      tr.s = ep.states[t];
      tr.s_next = ep.states[t + 1];
      tr.action = ep.actions[t];
      tr.reward = ep.rewards[t];
      tr.done = ep.success && t + 1 == ep.length();
      tr.goal_id = goal_id;
      pool.transitions.push_back(tr);
    }
  }
  return pool;
}

std::vector<BatchRef> mixed_batch_sampler(const TransitionPool& real,
                                          const TransitionPool& imaginary, int batch,
                                          double ratio, Rng& rng) {
  if (batch <= 0) throw std::invalid_argument("batch must be positive");
  if (ratio < 0 || ratio > 1) throw std::invalid_argument("ratio must be in [0,1]");
  if (real.empty() && imaginary.empty())
    throw std::invalid_argument("both transition pools are empty");

  std::vector<BatchRef> out;
  out.reserve(batch);
  if (imaginary.empty()) {
    for (int i = 0; i < batch; ++i) out.push_back({&real, rng.uniform_index(real.size())});
    return out;
  }
  if (real.empty()) {
    for (int i = 0; i < batch; ++i)
      out.push_back({&imaginary, rng.uniform_index(imaginary.size())});
    return out;
  }
  const int n_real = static_cast<int>(std::ceil(ratio * batch));
  for (int i = 0; i < n_real; ++i) out.push_back({&real, rng.uniform_index(real.size())});
  for (int i = n_real; i < batch; ++i)
    out.push_back({&imaginary, rng.uniform_index(imaginary.size())});
  return out;
}

namespace {

int steps_for_epoch(const RlTrainConfig& cfg, size_t pool_size) {
  if (cfg.steps_per_epoch > 0) return cfg.steps_per_epoch;
  return static_cast<int>((pool_size + cfg.batch_size - 1) / cfg.batch_size);
}

int argmax_low(const nn::Vec<float>& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

}  // namespace

std::vector<RlEpochLog> bc_train(PolicyNet<float>& policy, const TransitionPool& real,
                                 const TransitionPool& imaginary, const RlTrainConfig& cfg,
                                 const RlEpochHook& hook) {
  cfg.validate();
  if (real.empty() && imaginary.empty()) throw std::invalid_argument("no training data");
  nn::AdamConfig acfg;
  acfg.lr = cfg.lr;
  nn::Adam<float> opt(acfg);
  std::vector<RlEpochLog> log;
  const int steps = steps_for_epoch(cfg, real.size() + imaginary.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, static_cast<uint64_t>(epoch)));
    RlEpochLog el;
    el.epoch = epoch;
    double total_nll = 0;
    long count = 0;
    for (int step = 0; step < steps; ++step) {
      const auto batch =
          mixed_batch_sampler(real, imaginary, cfg.batch_size, cfg.mix_ratio, rng);
      policy.params().zero_grads();
      const float scale =
          static_cast<float>(cfg.imitation_weight / static_cast<double>(batch.size()));
      for (const auto& ref : batch) {
        const Transition& tr = ref.get();
        const float nll = bc_sample_loss(policy, tr.s, ref.pool->goal_tokens[tr.goal_id],
                                         tr.action, scale);
        if (!std::isfinite(nll)) throw NumericError("bc training diverged");
        total_nll += nll;
        ++count;
      }
      opt.step(policy.params());
    }
    el.loss = count > 0 ? total_nll / count : 0.0;
    if (hook) hook(epoch, policy, el);
    log.push_back(el);
  }
  return log;
}

std::vector<RlEpochLog> cql_train(PolicyNet<float>& policy, const TransitionPool& real,
                                  const TransitionPool& imaginary, const RlTrainConfig& cfg,
                                  const RlEpochHook& hook) {
  cfg.validate();
  if (real.empty() && imaginary.empty()) throw std::invalid_argument("no training data");
  for (const auto* pool : {&real, &imaginary}) {
    for (const auto& tr : pool->transitions) {
      if (!std::isfinite(tr.reward))
        throw std::invalid_argument("cql requires finite rewards on every transition");
    }
  }

  PolicyNet<float> target(policy.config());
  target.params().copy_values_from(policy.params());

  nn::AdamConfig acfg;
  acfg.lr = cfg.lr;
  nn::Adam<float> opt(acfg);
  std::vector<RlEpochLog> log;
  const int steps = steps_for_epoch(cfg, real.size() + imaginary.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, static_cast<uint64_t>(epoch)));
    RlEpochLog el;
    el.epoch = epoch;
    double td_sum = 0, cons_sum = 0;
    long batches = 0;
    for (int step = 0; step < steps; ++step) {
      const auto batch =
          mixed_batch_sampler(real, imaginary, cfg.batch_size, cfg.mix_ratio, rng);
      policy.params().zero_grads();
      const float inv_b = 1.0f / static_cast<float>(batch.size());
      double td_batch = 0, cons_batch = 0;
      for (const auto& ref : batch) {
        const Transition& tr = ref.get();
        const auto& tokens = ref.pool->goal_tokens[tr.goal_id];

        // target value: clipped double-Q on the frozen target network
        float y = tr.reward;
        if (!tr.done) {
          const nn::Vec<float> tg = target.goal_feature(tokens);
          const auto [tq1, tq2] = target.q_values(tr.s_next, tg);
          const nn::Vec<float> tmin = tq1.cwiseMin(tq2);
          y += static_cast<float>(cfg.gamma) * tmin(argmax_low(tmin));
        }

        const auto sample = cql_sample_loss(policy, tr.s, tokens, tr.action, y,
                                            static_cast<float>(cfg.cql_alpha), inv_b);
        if (!std::isfinite(sample.td)) throw NumericError("cql training diverged");
        if (sample.conservative < -1e-4f)
          throw NumericError("conservative term went negative");
        td_batch += sample.td;
        cons_batch += sample.conservative;
      }
      opt.step(policy.params());
      target.params().polyak_from(policy.params(), cfg.polyak);
      td_sum += td_batch / batch.size();
      cons_sum += cons_batch / batch.size();
      ++batches;
    }
    el.td = td_sum / std::max<long>(1, batches);
    el.conservative = cons_sum / std::max<long>(1, batches);
    el.loss = el.td + cfg.cql_alpha * el.conservative;
    if (hook) hook(epoch, policy, el);
    log.push_back(el);
  }
  return log;
}

const char* algo_name(PolicyAlgo a) { return a == PolicyAlgo::Bc ? "bc" : "cql"; }

PolicyAlgo algo_from_name(const std::string& s) {
  if (s == "bc") return PolicyAlgo::Bc;
  if (s == "cql") return PolicyAlgo::Cql;
  throw std::invalid_argument("unknown algorithm: " + s);
}

int act_with_feature(const PolicyNet<float>& policy, PolicyAlgo algo, const env::EnvState& s,
                     const nn::Vec<float>& goal_feature) {
  if (algo == PolicyAlgo::Bc) {
    return argmax_low(policy.policy_logits(s, goal_feature));
  }
  const auto [q1, q2] = policy.q_values(s, goal_feature);
  const nn::Vec<float> qmin = q1.cwiseMin(q2);
  return argmax_low(qmin);
}

int act(const PolicyNet<float>& policy, PolicyAlgo algo, const env::EnvState& s,
        const std::vector<int>& goal_tokens) {
  return act_with_feature(policy, algo, s, policy.goal_feature(goal_tokens));
}

}  // namespace rollforge::rl
