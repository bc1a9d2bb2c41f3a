#include <algorithm>

#include "rollforge/grounded_model.hpp"
#include "rollforge/instructions.hpp"

namespace rollforge::lm {

std::vector<EpochMetrics> finetune(GroundedModel<float>& model,
                                   const std::vector<InstructionSample>& data,
                                   const FinetuneConfig& cfg, const EpochHook& per_epoch) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("finetune needs a non-empty dataset");
  nn::AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  nn::Adam<float> opt(adam_cfg);
  std::vector<EpochMetrics> log;
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, static_cast<uint64_t>(epoch)));
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_index(i)]);

    EpochMetrics em;
    em.epoch = epoch;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      model.params().zero_grads();
      for (size_t k = start; k < stop; ++k) {
        const auto& sample = data[order[k]];
        const LossBreakdown lb = model.sample_loss(sample, cfg.weights, scale);
        if (!std::isfinite(lb.total))
          throw NumericError("fine-tuning diverged: non-finite loss");
        const int ti = static_cast<int>(sample.task);
        em.task_loss[ti] += lb.total;
        em.task_samples[ti] += 1;
      }
      opt.step(model.params());
    }
    double total = 0;
    long n = 0;
    for (int t = 0; t < 4; ++t) {
      total += em.task_loss[t];
      n += em.task_samples[t];
      if (em.task_samples[t] > 0) em.task_loss[t] /= em.task_samples[t];
    }
    em.mean_loss = n > 0 ? total / n : 0.0;
    log.push_back(em);
    if (per_epoch) per_epoch(epoch, model);
  }
  return log;
}

env::EnvState clamp_state(const nn::Vec<float>& raw, const env::EnvConfig& cfg) {
  env::EnvState s;
  const float lo = static_cast<float>(cfg.center_min());
  const float hi = static_cast<float>(cfg.center_max());
  for (int d = 0; d < env::kStateDim; ++d) {
    const float v = raw(d);
    if (!std::isfinite(v)) throw NumericError("generated state is not finite");
    s.p[d] = std::clamp(v, lo, hi);
  }
  return s;
}

env::EnvState predict_next_state(const GroundedModel<float>& model, const env::EnvState& s,
                                 int action, const text::Vocabulary& vocab,
                                 const env::EnvConfig& env_cfg) {
  PromptFields f;
  f.state = &s;
  f.action = action;
  const auto prompt = format_prompt(Task::Dynamics, f, vocab);
  typename GroundedModel<float>::Session session(model);
  const nn::Vec<float> h = session.append_all(prompt);
  return clamp_state(model.state_estimate(h), env_cfg);
}

env::EnvState predict_consequence(const GroundedModel<float>& model, const env::EnvState& s0,
                                  const std::string& goal_text, const text::Vocabulary& vocab,
                                  const env::EnvConfig& env_cfg) {
  PromptFields f;
  f.state = &s0;
  f.goal_text = &goal_text;
  const auto prompt = format_prompt(Task::Consequence, f, vocab);
  typename GroundedModel<float>::Session session(model);
  const nn::Vec<float> h = session.append_all(prompt);
  return clamp_state(model.state_estimate(h), env_cfg);
}

ExplainResult explain_rollout(const GroundedModel<float>& model, const env::Episode& rollout,
                              const text::Vocabulary& vocab, int token_cap) {
  PromptFields f;
  f.rollout = &rollout;
  const auto prompt = format_prompt(Task::Explain, f, vocab);
  typename GroundedModel<float>::Session session(model);
  nn::Vec<float> h = session.append_all(prompt);
  ExplainResult out;
  std::vector<int> ids;
  for (int k = 0; k < token_cap; ++k) {
    const nn::Vec<float> logits = model.token_logits(h);
    int best = 0;
    for (int i = 1; i < logits.size(); ++i)
      if (logits(i) > logits(best)) best = i;
    if (best == text::Vocabulary::kEos) {
      out.text = text::detokenize(ids, vocab);
      return out;
    }
    ids.push_back(best);
    h = session.append(ModalElement::text(best));
  }
  out.text = text::detokenize(ids, vocab);
  out.truncated = true;
  return out;
}

DynamicsEval evaluate_dynamics_mse(const GroundedModel<float>& model,
                                   const std::vector<env::Episode>& episodes,
                                   const text::Vocabulary& vocab,
                                   const env::EnvConfig& env_cfg, uint64_t seed) {
  if (episodes.empty()) throw std::invalid_argument("no episodes to evaluate");
  double model_sq = 0.0, copy_sq = 0.0;
  long n = 0;
  for (size_t i = 0; i < episodes.size(); ++i) {
    const auto& ep = episodes[i];
    Rng rng(derive_seed(seed, static_cast<uint64_t>(i)));
    const int t = rng.uniform_int(0, ep.length() - 1);
    const env::EnvState pred =
        predict_next_state(model, ep.states[t], ep.actions[t], vocab, env_cfg);
    const env::EnvState& truth = ep.states[t + 1];
    for (int d = 0; d < env::kStateDim; ++d) {
      model_sq += (double(pred.p[d]) - truth.p[d]) * (double(pred.p[d]) - truth.p[d]);
      copy_sq += (double(ep.states[t].p[d]) - truth.p[d]) *
                 (double(ep.states[t].p[d]) - truth.p[d]);
    }
    n += env::kStateDim;
  }
  return {model_sq / n, copy_sq / n};
}

}  // namespace rollforge::lm
