#include "rollforge/imagination.hpp"

#include <cmath>

#include "rollforge/instructions.hpp"

namespace rollforge::imagine {

using env::Episode;
using env::EnvConfig;
using env::EnvState;
using env::GoalSpec;
using lm::GroundedModel;
using lm::ModalElement;

namespace {

int sample_action(const nn::Vec<float>& logits, double temperature, Rng& rng) {
  if (temperature <= 0.0) {
    int best = 0;
    for (int i = 1; i < logits.size(); ++i)
      if (logits(i) > logits(best)) best = i;
    return best;
  }
  nn::Vec<float> scaled = logits / static_cast<float>(temperature);
  const nn::Vec<float> p = nn::softmax(scaled);
  double u = rng.uniform();
  for (int i = 0; i < p.size(); ++i) {
    u -= p(i);
    if (u <= 0) return i;
  }
  return static_cast<int>(p.size()) - 1;
}

// Anchored potential for absolute_move goals: progress of the target along
// the goal axis from the anchor state, capped at the displacement threshold,
// minus drift of every other ball. Used only to relabel imaginary rollouts;
// absolute_move has no plain state potential.
double absolute_move_potential(const EnvState& s, const EnvState& anchor, const GoalSpec& g,
                               const EnvConfig& cfg) {
  const double d_min = 0.8 * cfg.step_size;
  const double eps_move = 0.25 * cfg.step_size;
  const auto axis = env::compass_unit(env::direction_compass(g.direction));
  const double dx = double(s.x(g.target)) - anchor.x(g.target);
  const double dy = double(s.y(g.target)) - anchor.y(g.target);
  const double progress = std::min(d_min, dx * axis[0] + dy * axis[1]);
  double drift = 0.0;
  for (int b = 0; b < env::kNumBalls; ++b) {
    if (b == g.target) continue;
    const double ox = double(s.x(b)) - anchor.x(b);
    const double oy = double(s.y(b)) - anchor.y(b);
    drift += std::max(0.0, std::hypot(ox, oy) - eps_move);
  }
  return progress - drift;
}

bool absolute_move_success(const EnvState& s, const EnvState& anchor, const GoalSpec& g,
                           const EnvConfig& cfg) {
  const double d_min = 0.8 * cfg.step_size;
  const double eps_move = 0.25 * cfg.step_size;
  const auto axis = env::compass_unit(env::direction_compass(g.direction));
  const double dx = double(s.x(g.target)) - anchor.x(g.target);
  const double dy = double(s.y(g.target)) - anchor.y(g.target);
  if (dx * axis[0] + dy * axis[1] < d_min) return false;
  for (int b = 0; b < env::kNumBalls; ++b) {
    if (b == g.target) continue;
    const double ox = double(s.x(b)) - anchor.x(b);
    const double oy = double(s.y(b)) - anchor.y(b);
    if (std::hypot(ox, oy) >= eps_move) return false;
  }
  return true;
}

}  // namespace

Episode generate_rollout(const GroundedModel<float>& model, const GoalSpec& goal,
                         const text::Vocabulary& vocab, const EnvConfig& env_cfg,
                         const GenerateConfig& gen, uint64_t seed) {
  if (gen.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  Rng rng(seed);
  Episode ep;
  ep.goal = goal;
  ep.provenance = env::Provenance::Imaginary;

  std::vector<ModalElement> prompt;
  if (gen.with_instruction) {
    lm::PromptFields f;
    f.goal_text = &goal.text;
    prompt = lm::format_prompt(lm::Task::Generate, f, vocab);
  } else {
    prompt = lm::format_plain_prompt(goal.text, vocab);
  }
  // prompt + s0 + (a s) pairs + margin must fit the positional table
  const int budget = model.config().max_seq - static_cast<int>(prompt.size()) - 2;
  const int max_steps = std::max(1, std::min(gen.max_steps, budget / 2));

  typename GroundedModel<float>::Session session(model);
  nn::Vec<float> h = session.append_all(prompt);
  const EnvState s0 = lm::clamp_state(model.state_estimate(h), env_cfg);
  ep.states.push_back(s0);
  nn::Vec<float> h_state = session.append(ModalElement::state_of(s0));

  for (int t = 0; t < max_steps; ++t) {
    if (t > 0) {
      // the schema requires at least one action before stopping
      const float stop = model.stop_logit(h_state);
      if (stop > 0.0f) break;  // sigmoid(x) > 0.5
    }
    const int action = sample_action(model.action_logits(h_state), gen.temperature, rng);
    ep.actions.push_back(action);
    const nn::Vec<float> h_action = session.append(ModalElement::action_of(action));
    const EnvState next = lm::clamp_state(model.state_estimate(h_action), env_cfg);
    ep.states.push_back(next);
    h_state = session.append(ModalElement::state_of(next));
  }
  return ep;
}

Episode validate_and_relabel(Episode rollout, const EnvConfig& cfg) {
  rollout.provenance = env::Provenance::Imaginary;
  rollout.has_validity = true;
  auto& v = rollout.validity;

  v.schema_ok = !rollout.actions.empty() &&
                rollout.states.size() == rollout.actions.size() + 1;
  v.bounds_ok = true;
  for (const auto& s : rollout.states)
    if (!env::state_in_bounds(s, cfg)) v.bounds_ok = false;

  double consistency = 0.0;
  if (v.schema_ok) {
    for (size_t t = 0; t < rollout.actions.size(); ++t) {
      const EnvState simulated = env::step_index(rollout.states[t], rollout.actions[t], cfg);
      double sq = 0.0;
      for (int d = 0; d < env::kStateDim; ++d) {
        const double diff = double(rollout.states[t + 1].p[d]) - simulated.p[d];
        sq += diff * diff;
      }
      consistency += std::sqrt(sq);
    }
    consistency /= static_cast<double>(rollout.actions.size());
  }
  v.dynamics_consistency = consistency;

  // reward relabeling from the environment's oracle on the generated states
  const auto& g = rollout.goal;
  rollout.rewards.assign(rollout.actions.size(), 0.0f);
  rollout.success = false;
  if (!v.schema_ok) return rollout;
  if (g.kind == env::GoalKind::AbsoluteMove) {
    const EnvState& anchor = rollout.states.front();
    for (size_t t = 0; t < rollout.actions.size(); ++t) {
      const double phi0 = absolute_move_potential(rollout.states[t], anchor, g, cfg);
      const double phi1 = absolute_move_potential(rollout.states[t + 1], anchor, g, cfg);
      const bool hit = absolute_move_success(rollout.states[t + 1], anchor, g, cfg);
      rollout.rewards[t] =
          static_cast<float>(phi1 - phi0 + (hit ? cfg.success_bonus : 0.0));
      if (hit) rollout.success = true;
    }
  } else {
    for (size_t t = 0; t < rollout.actions.size(); ++t) {
      rollout.rewards[t] = static_cast<float>(env::reward_index(
          rollout.states[t], rollout.actions[t], rollout.states[t + 1], g, cfg));
    }
    rollout.success = env::goal_satisfied(rollout.states.back(), g, cfg);
  }
  return rollout;
}

bool passes_filter(const Episode& rollout, const FilterConfig& filter) {
  if (!rollout.has_validity) throw std::invalid_argument("rollout not validated");
  if (!rollout.validity.schema_ok || !rollout.validity.bounds_ok) return false;
  return rollout.validity.dynamics_consistency <= filter.kappa;
}

CorpusResult generate_corpus(const GroundedModel<float>& model, env::GoalLevel level,
                             int count, const text::Vocabulary& vocab,
                             const EnvConfig& env_cfg, const GenerateConfig& gen,
                             const FilterConfig& filter, uint64_t seed,
                             const text::NovelSetOptions& novel_opts) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  const auto goals = text::novel_goal_set(level, novel_opts);
  if (goals.empty()) throw std::invalid_argument("empty goal set");

  CorpusResult out;
  const long budget = static_cast<long>(filter.budget_factor) * count;
  long attempt = 0;
  while (static_cast<int>(out.rollouts.size()) < count) {
    if (attempt >= budget) {
      out.acceptance_rate =
          attempt > 0 ? static_cast<double>(out.rollouts.size()) / attempt : 0.0;
      throw NumericError(
          "generation budget exhausted: accepted " + std::to_string(out.rollouts.size()) +
          "/" + std::to_string(count) + " after " + std::to_string(attempt) +
          " attempts (acceptance " + std::to_string(out.acceptance_rate) + ")");
    }
    const auto& goal = goals[attempt % goals.size()].second;
    Episode ep = generate_rollout(model, goal, vocab, env_cfg, gen,
                                  derive_seed(seed, static_cast<uint64_t>(attempt)));
    ep = validate_and_relabel(std::move(ep), env_cfg);
    ++attempt;
    if (passes_filter(ep, filter)) out.rollouts.push_back(std::move(ep));
    if (attempt >= count && filter.acceptance_floor > 0.0) {
      const double rate = static_cast<double>(out.rollouts.size()) / attempt;
      if (rate < filter.acceptance_floor) {
        throw NumericError("acceptance rate " + std::to_string(rate) +
                           " below floor after " + std::to_string(attempt) + " attempts");
      }
    }
  }
  out.attempts = attempt;
  out.acceptance_rate = static_cast<double>(out.rollouts.size()) / attempt;
  return out;
}

}  // namespace rollforge::imagine
