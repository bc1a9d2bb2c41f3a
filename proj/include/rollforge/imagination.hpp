#pragma once

#include "rollforge/corpus.hpp"
#include "rollforge/grounded_model.hpp"

namespace rollforge::imagine {

struct GenerateConfig {
  int max_steps = 20;
  double temperature = 1.0;       // action sampling; 0 = greedy
  bool with_instruction = true;   // bare goal prompt for the no-instruction arm
};

// Schedule-driven decode for one goal: STATE, then (ACTION, STATE) pairs until
// the stop head fires or max_steps; rewards are left empty until relabeling.
env::Episode generate_rollout(const lm::GroundedModel<float>& model,
                              const env::GoalSpec& goal, const text::Vocabulary& vocab,
                              const env::EnvConfig& env_cfg, const GenerateConfig& gen,
                              uint64_t seed);

// Fills validity flags and recomputes rewards/success from the environment's
// reward oracle on the generated states.
env::Episode validate_and_relabel(env::Episode rollout, const env::EnvConfig& cfg);

struct FilterConfig {
  double kappa = std::numeric_limits<double>::infinity();  // dynamics gate; inf = keep all
  double acceptance_floor = 0.02;
  int budget_factor = 20;  // attempts allowed per requested rollout
};

struct CorpusResult {
  std::vector<env::Episode> rollouts;
  long attempts = 0;
  double acceptance_rate = 1.0;
};

// Cycles through novel_goal_set(level) until `count` rollouts pass the filter.
CorpusResult generate_corpus(const lm::GroundedModel<float>& model, env::GoalLevel level,
                             int count, const text::Vocabulary& vocab,
                             const env::EnvConfig& env_cfg, const GenerateConfig& gen,
                             const FilterConfig& filter, uint64_t seed,
                             const text::NovelSetOptions& novel_opts = {});

bool passes_filter(const env::Episode& rollout, const FilterConfig& filter);

}  // namespace rollforge::imagine
