#pragma once

#include <set>
#include <string>
#include <vector>

#include "rollforge/env.hpp"
#include "rollforge/evalkit.hpp"
#include "rollforge/grounded_model.hpp"
#include "rollforge/imagination.hpp"
#include "rollforge/offlinerl.hpp"

namespace rollforge::pipeline {

struct DataSection {
  int episodes = 2000;
  int eval_episodes = 300;  // held-out split for dynamics/explanation checks
};

struct CorpusSection {
  size_t max_compose2 = 400;
  size_t max_compose3 = 400;
};

struct ModelSection {
  int dim = 64;
  int layers = 2;
  int heads = 4;
  int ffn = 256;
  int max_seq = 160;
  int state_hidden = 64;
  int action_hidden = 64;
};

struct FinetuneSection {
  int epochs = 20;
  int batch = 32;
  double lr = 3e-4;
  double w_text = 1.0, w_state = 1.0, w_action = 1.0, w_stop = 1.0;
  int checkpoint_every = 1;
};

struct ImagineSection {
  int rephrasing = 560;
  int unseen_easy = 724;
  int unseen_hard = 168;
  double temperature = 1.0;
  double kappa = std::numeric_limits<double>::infinity();
  double acceptance_floor = 0.0;
  int budget_factor = 20;
  int max_steps = 20;
};

struct RlSection {
  int bc_epochs = 8;
  int cql_epochs = 8;
  int bc_batch = 100;
  int cql_batch = 32;
  double bc_lr = 1e-3;
  double cql_lr = 6.25e-5;
  double gamma = 0.99;
  double cql_alpha = 10.0;
  double polyak = 0.005;
  double imitation_weight = 0.5;
  double mix_ratio = 0.5;
  int steps_per_epoch = 200;
  int eval_episodes = 100;  // interleaved per-epoch evaluation
};

struct EvalSection {
  int episodes = 200;
  int gen_checkpoints = 5;
  int gen_samples = 200;
  int explanation_samples = 200;
};

struct AblateSection {
  int episodes = 600;
  int epochs = 10;
  int last_k = 5;
  int gen_per_checkpoint = 100;
  int imagined = 200;
  int policy_eval = 100;
};

struct RunConfig {
  env::EnvConfig env;
  DataSection data;
  CorpusSection corpus;
  ModelSection model;
  FinetuneSection finetune;
  ImagineSection imagine;
  RlSection rl;
  EvalSection eval;
  AblateSection ablate;
  uint64_t seed = 0;
  std::string out_dir = "artifacts";
  std::vector<uint64_t> rl_seeds = {0, 1, 2};
  std::vector<std::string> arms = {"bc", "bc_kalm", "cql", "cql_kalm"};

  void validate() const;
};

// Sorted key=value dump; the config hash and manifest identity derive from it.
std::string canonical_config(const RunConfig& cfg);
uint64_t config_hash(const RunConfig& cfg);

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {
      "gen-data", "build-instructions", "finetune", "imagine",
      "train-policy", "evaluate", "ablate"};
  return names;
}

// Runs one stage against the artifact directory; inputs must exist.
void run_stage(const RunConfig& cfg, const std::string& stage);

// Dependency chain: gen-data, build-instructions, finetune, imagine,
// train-policy, evaluate. The ablation stage runs via its own subcommand.
void run_all(const RunConfig& cfg);

// Relative paths of every artifact a stage declares in its manifest.
std::vector<std::string> stage_outputs(const RunConfig& cfg, const std::string& stage);

}  // namespace rollforge::pipeline
