#pragma once

#include <map>
#include <optional>

#include "rollforge/corpus.hpp"
#include "rollforge/grounded_model.hpp"
#include "rollforge/imagination.hpp"
#include "rollforge/offlinerl.hpp"

namespace rollforge::eval {

struct PolicyHandle {
  const rl::PolicyNet<float>* net = nullptr;
  rl::PolicyAlgo algo = rl::PolicyAlgo::Bc;
};

// Greedy policy rollouts against the environment; success counts a goal
// satisfied at any visited state. absolute_move goals use the displacement
// test (target moved >= 0.8 * step along the goal axis, every other ball
// displaced < 0.25 * step) against any visited state.
double evaluate_success(const PolicyHandle& policy,
                        const std::vector<std::pair<std::string, env::GoalSpec>>& goal_set,
                        const text::Vocabulary& vocab, const env::EnvConfig& cfg,
                        int n_episodes, uint64_t seed);

bool displacement_success(const env::EnvState& from, const env::EnvState& to,
                          const env::GoalSpec& g, const env::EnvConfig& cfg);

struct GenerationAccuracy {
  double state_match = 0.0;
  double action_match = 0.0;
  int n = 0;
};

// Match rates of generated rollouts against their unseen-easy goals: the
// first action must move the goal ball within 45 degrees of the goal
// direction; the first state delta must pass the displacement test.
GenerationAccuracy generation_accuracy(const std::vector<env::Episode>& rollouts,
                                       const env::EnvConfig& cfg);

// Keyword judgment of an explanation against the goal label: target color,
// reference color (when the kind has one), a correct direction word, and no
// contradicting direction word.
bool explanation_matches(const std::string& explanation, const env::GoalSpec& goal);
double explanation_accuracy(const lm::GroundedModel<float>& model,
                            const std::vector<env::Episode>& episodes,
                            const text::Vocabulary& vocab, int max_episodes, uint64_t seed);

// --- instruction-following ablation ---

struct AblationConfig {
  bool with_prompts_arm = true;
  bool without_prompts_arm = true;
  std::vector<uint64_t> seeds = {0, 1, 2};
  int n_train_episodes = 800;
  lm::ModelConfig model;        // vocab_size filled from the shared vocabulary
  lm::FinetuneConfig finetune;  // per-arm fine-tuning settings
  int last_k_epochs = 5;
  int gen_per_checkpoint = 100;
  int imagined_count = 200;       // unseen-easy corpus size per arm x seed
  bool train_policies = true;     // BC + mixed batches, evaluated on all levels
  rl::RlTrainConfig bc;
  int policy_eval_episodes = 100;
  env::EnvConfig env;

  void validate() const {
    if (!with_prompts_arm || !without_prompts_arm)
      throw ConfigError("ablation needs both arms enabled");
    if (seeds.empty()) throw ConfigError("ablation needs at least one seed");
    if (last_k_epochs < 1 || last_k_epochs > finetune.epochs)
      throw ConfigError("last_k_epochs must be within the fine-tuning epochs");
  }
};

struct AblationArmResult {
  std::string arm;  // "with_iff" | "without_iff"
  uint64_t seed = 0;
  std::vector<int> checkpoint_epochs;
  std::vector<double> state_match;   // per checkpoint epoch
  std::vector<double> action_match;  // per checkpoint epoch
  double mean_state_match = 0.0;
  double mean_action_match = 0.0;
  std::map<std::string, double> success_per_level;  // level name -> rate
};

struct AblationReport {
  std::vector<AblationArmResult> arms;
  double with_iff_state_match = 0.0;     // seed means of last-k means
  double without_iff_state_match = 0.0;
};

AblationReport run_ablation(const AblationConfig& cfg, const text::Vocabulary& vocab);

// --- report emission ---

struct SuccessRow {
  std::string level;
  std::string arm;
  uint64_t seed = 0;
  int epoch = 0;
  double success = 0.0;
};

struct GenerationRow {
  std::string arm;
  uint64_t seed = 0;
  int epoch = 0;
  double state_match = 0.0;
  double action_match = 0.0;
};

struct ExplanationRow {
  bool seen = true;
  uint64_t seed = 0;
  double accuracy = 0.0;
};

struct EvalReport {
  std::vector<SuccessRow> success_rows;
  std::vector<GenerationRow> generation_rows;
  std::vector<ExplanationRow> explanation_rows;
  std::vector<uint64_t> seeds;
  uint64_t config_hash = 0;
};

// CSV tables plus SVG learning curves with mean +/- std shading; file names
// carry the config hash. Returns the list of files written.
std::vector<std::string> emit_report(const EvalReport& report, const std::string& out_dir);

// Evenly spaced checkpoint epochs (five by default) mirroring the
// checkpoint-curve protocol.
std::vector<int> checkpoint_epochs(int total_epochs, int k = 5);

}  // namespace rollforge::eval
