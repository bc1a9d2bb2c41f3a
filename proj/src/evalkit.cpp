#include "rollforge/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rollforge/instructions.hpp"

namespace rollforge::eval {

using env::EnvConfig;
using env::EnvState;
using env::GoalKind;
using env::GoalSpec;

bool displacement_success(const EnvState& from, const EnvState& to, const GoalSpec& g,
                          const EnvConfig& cfg) {
  const double d_min = 0.8 * cfg.step_size;
  const double eps_move = 0.25 * cfg.step_size;
  const auto axis = env::compass_unit(env::direction_compass(g.direction));
  const double dx = double(to.x(g.target)) - from.x(g.target);
  const double dy = double(to.y(g.target)) - from.y(g.target);
  if (dx * axis[0] + dy * axis[1] < d_min) return false;
  for (int b = 0; b < env::kNumBalls; ++b) {
    if (b == g.target) continue;
    const double ox = double(to.x(b)) - from.x(b);
    const double oy = double(to.y(b)) - from.y(b);
    if (std::hypot(ox, oy) >= eps_move) return false;
  }
  return true;
}

double evaluate_success(const PolicyHandle& policy,
                        const std::vector<std::pair<std::string, GoalSpec>>& goal_set,
                        const text::Vocabulary& vocab, const EnvConfig& cfg, int n_episodes,
                        uint64_t seed) {
  if (goal_set.empty()) throw std::invalid_argument("empty goal set");
  if (!policy.net) throw std::invalid_argument("null policy");
  int successes = 0;
  for (int i = 0; i < n_episodes; ++i) {
    const uint64_t ep_seed = derive_seed(seed, static_cast<uint64_t>(i));
    Rng rng(derive_seed(ep_seed, "goal"));
    const auto& [goal_text, goal] = goal_set[rng.uniform_index(goal_set.size())];
    const std::vector<int> tokens = text::tokenize(goal_text, vocab);
    const nn::Vec<float> feature = policy.net->goal_feature(tokens);

    EnvState s = env::reset(derive_seed(ep_seed, "reset"), cfg);
    const EnvState s0 = s;
    bool done = false;
    auto satisfied = [&](const EnvState& cur) {
      if (goal.kind == GoalKind::AbsoluteMove) return displacement_success(s0, cur, goal, cfg);
      return env::goal_satisfied(cur, goal, cfg);
    };
    if (satisfied(s)) done = true;
    for (int t = 0; t < cfg.horizon && !done; ++t) {
      const int a = rl::act_with_feature(*policy.net, policy.algo, s, feature);
      s = env::step_index(s, a, cfg);
      if (satisfied(s)) done = true;
    }
    if (done) ++successes;
  }
  return static_cast<double>(successes) / std::max(1, n_episodes);
}

GenerationAccuracy generation_accuracy(const std::vector<env::Episode>& rollouts,
                                       const EnvConfig& cfg) {
  GenerationAccuracy acc;
  for (const auto& ep : rollouts) {
    if (ep.goal.kind != GoalKind::AbsoluteMove)
      throw std::invalid_argument("generation accuracy is defined for unseen-easy goals");
    if (ep.actions.empty() || ep.states.size() < 2) {
      ++acc.n;
      continue;
    }
    const int ball = ep.actions[0] / env::kNumDirections;
    const int dir = ep.actions[0] % env::kNumDirections;
    const int want = static_cast<int>(env::direction_compass(ep.goal.direction));
    const int diff = std::abs(dir - want);
    const bool dir_ok = std::min(diff, env::kNumDirections - diff) <= 1;
    if (ball == ep.goal.target && dir_ok) acc.action_match += 1;
    if (displacement_success(ep.states[0], ep.states[1], ep.goal, cfg)) acc.state_match += 1;
    ++acc.n;
  }
  if (acc.n > 0) {
    acc.state_match /= acc.n;
    acc.action_match /= acc.n;
  }
  return acc;
}

bool explanation_matches(const std::string& explanation, const GoalSpec& goal) {
  const auto words = text::normalize_words(explanation);
  const std::set<std::string> bag(words.begin(), words.end());
  auto has_any = [&](const std::vector<std::string>& keys) {
    for (const auto& k : keys)
      if (bag.count(k)) return true;
    return false;
  };
  int target = goal.target, reference = goal.reference;
  env::GoalDirection direction = goal.direction;
  if (goal.kind == GoalKind::Compose2 || goal.kind == GoalKind::Compose3) {
    // judge against the first sub-goal for composite labels
    target = goal.subgoals[0].target;
    reference = goal.subgoals[0].reference;
    direction = goal.subgoals[0].direction;
  } else if (goal.kind != GoalKind::RelativePosition && goal.kind != GoalKind::AbsoluteMove) {
    throw std::invalid_argument("explanation judgment needs a directional goal");
  }
  if (!bag.count(env::kBallColors[target])) return false;
  if (reference >= 0 && !bag.count(env::kBallColors[reference])) return false;
  if (!has_any(text::direction_keywords(direction))) return false;
  for (int d = 0; d < 4; ++d) {
    if (d == static_cast<int>(direction)) continue;
    if (has_any(text::direction_keywords(static_cast<env::GoalDirection>(d)))) return false;
  }
  return true;
}

double explanation_accuracy(const lm::GroundedModel<float>& model,
                            const std::vector<env::Episode>& episodes,
                            const text::Vocabulary& vocab, int max_episodes, uint64_t seed) {
  if (episodes.empty()) throw std::invalid_argument("no episodes");
  Rng rng(seed);
  const int n = std::min<int>(max_episodes, static_cast<int>(episodes.size()));
  std::vector<size_t> order(episodes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    const auto& ep = episodes[order[i]];
    const auto result = lm::explain_rollout(model, ep, vocab);
    if (explanation_matches(result.text, ep.goal)) ++correct;
  }
  return static_cast<double>(correct) / std::max(1, n);
}

std::vector<int> checkpoint_epochs(int total_epochs, int k) {
  std::vector<int> out;
  if (total_epochs <= 0 || k <= 0) return out;
  if (k >= total_epochs) {
    for (int e = 1; e <= total_epochs; ++e) out.push_back(e);
    return out;
  }
  for (int i = 0; i < k; ++i) {
    const int e = static_cast<int>(std::round((i + 1) * double(total_epochs) / k));
    out.push_back(std::max(1, e));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

AblationReport run_ablation(const AblationConfig& cfg, const text::Vocabulary& vocab) {
  cfg.validate();
  AblationReport report;
  const auto easy_goals = text::novel_goal_set(env::GoalLevel::UnseenEasy);

  for (const bool with_prompts : {true, false}) {
    double arm_mean = 0.0;
    for (uint64_t seed : cfg.seeds) {
      AblationArmResult arm;
      arm.arm = with_prompts ? "with_iff" : "without_iff";
      arm.seed = seed;

      const uint64_t data_seed = derive_seed(seed, "ablation-data");
      const auto episodes = env::collect_dataset(
          cfg.n_train_episodes, cfg.env, data_seed,
          [&](Rng& rng) { return text::sample_offline_goal(rng); });
      const auto samples = with_prompts
                               ? lm::build_instruction_dataset(episodes, vocab, data_seed)
                               : lm::build_plain_dataset(episodes, vocab);

      lm::ModelConfig mc = cfg.model;
      mc.vocab_size = vocab.size();
      mc.seed = derive_seed(seed, "ablation-model");
      lm::GroundedModel<float> model(mc);

      lm::FinetuneConfig fc = cfg.finetune;
      fc.seed = derive_seed(seed, "ablation-finetune");

      const int first_tracked = fc.epochs - cfg.last_k_epochs + 1;
      imagine::GenerateConfig gen;
      gen.temperature = 0.0;
      gen.with_instruction = with_prompts;
      lm::finetune(model, samples, fc, [&](int epoch, lm::GroundedModel<float>& m) {
        if (epoch < first_tracked) return;
        std::vector<env::Episode> rollouts;
        Rng grng(derive_seed(seed, "ablation-gen") ^ epoch);
        for (int i = 0; i < cfg.gen_per_checkpoint; ++i) {
          const auto& goal = easy_goals[grng.uniform_index(easy_goals.size())].second;
          rollouts.push_back(imagine::generate_rollout(m, goal, vocab, cfg.env, gen,
                                                       grng.next_u64()));
        }
        const auto acc = generation_accuracy(rollouts, cfg.env);
        arm.checkpoint_epochs.push_back(epoch);
        arm.state_match.push_back(acc.state_match);
        arm.action_match.push_back(acc.action_match);
      });
      for (double v : arm.state_match) arm.mean_state_match += v;
      for (double v : arm.action_match) arm.mean_action_match += v;
      if (!arm.state_match.empty()) {
        arm.mean_state_match /= arm.state_match.size();
        arm.mean_action_match /= arm.action_match.size();
      }

      if (cfg.train_policies) {
        imagine::GenerateConfig pg = gen;
        pg.temperature = 1.0;
        imagine::FilterConfig filter;  // defaults keep everything
        filter.acceptance_floor = 0.0;
        const auto corpus = imagine::generate_corpus(
            model, env::GoalLevel::UnseenEasy, cfg.imagined_count, vocab, cfg.env, pg, filter,
            derive_seed(seed, "ablation-imagine"));
        const auto real = rl::TransitionPool::from_episodes(episodes, vocab);
        const auto imag = rl::TransitionPool::from_episodes(corpus.rollouts, vocab);
        rl::RlTrainConfig bc = cfg.bc;
        bc.seed = derive_seed(seed, "ablation-bc");
        rl::PolicyConfig pc;
        pc.vocab_size = vocab.size();
        pc.seed = derive_seed(seed, "ablation-policy");
        rl::PolicyNet<float> policy(pc);
        rl::bc_train(policy, real, imag, bc);
        PolicyHandle handle{&policy, rl::PolicyAlgo::Bc};
        for (int lvl = 0; lvl < 4; ++lvl) {
          const auto level = static_cast<env::GoalLevel>(lvl);
          std::vector<std::pair<std::string, GoalSpec>> goal_set;
          if (level == env::GoalLevel::Offline) {
            for (size_t c = 0; c < 80; ++c)
              for (size_t p = 0; p < 18; ++p) {
                auto g = text::offline_goal(c, p);
                goal_set.emplace_back(g.text, g);
              }
          } else {
            text::NovelSetOptions opts;
            opts.max_compose2 = 200;
            opts.max_compose3 = 200;
            goal_set = text::novel_goal_set(level, opts);
          }
          arm.success_per_level[env::level_name(level)] =
              evaluate_success(handle, goal_set, vocab, cfg.env, cfg.policy_eval_episodes,
                               derive_seed(seed, std::string("ablation-eval-") +
                                                     env::level_name(level)));
        }
      }
      arm_mean += arm.mean_state_match;
      report.arms.push_back(std::move(arm));
    }
    arm_mean /= cfg.seeds.size();
    if (with_prompts)
      report.with_iff_state_match = arm_mean;
    else
      report.without_iff_state_match = arm_mean;
  }
  return report;
}

}  // namespace rollforge::eval
