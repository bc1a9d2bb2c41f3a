#include "rollforge/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "rollforge/checkpoint.hpp"
#include "rollforge/episode_io.hpp"
#include "rollforge/instructions.hpp"

namespace rollforge::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
  env.validate();
  if (data.episodes < 1) throw ConfigError("data.episodes must be >= 1");
  if (finetune.epochs < 0 || finetune.batch < 1) throw ConfigError("bad finetune section");
  if (out_dir.empty()) throw ConfigError("out_dir must be set");
  if (rl_seeds.empty()) throw ConfigError("need at least one rl seed");
  for (const auto& arm : arms) {
    if (arm != "bc" && arm != "bc_kalm" && arm != "cql" && arm != "cql_kalm")
      throw ConfigError("unknown arm: " + arm);
  }
}

std::string canonical_config(const RunConfig& cfg) {
  std::map<std::string, std::string> kv;
  auto put = [&](const std::string& k, auto v) {
    std::ostringstream os;
    os << v;
    kv[k] = os.str();
  };
  put("env.arena_min", cfg.env.arena_min);
  put("env.arena_max", cfg.env.arena_max);
  put("env.ball_radius", cfg.env.ball_radius);
  put("env.step_size", cfg.env.step_size);
  put("env.min_separation", cfg.env.min_separation);
  put("env.horizon", cfg.env.horizon);
  put("env.margin", cfg.env.margin);
  put("env.line_tolerance", cfg.env.line_tolerance);
  put("env.gather_radius", cfg.env.gather_radius);
  put("env.success_bonus", cfg.env.success_bonus);
  put("data.episodes", cfg.data.episodes);
  put("data.eval_episodes", cfg.data.eval_episodes);
  put("corpus.max_compose2", cfg.corpus.max_compose2);
  put("corpus.max_compose3", cfg.corpus.max_compose3);
  put("model.dim", cfg.model.dim);
  put("model.layers", cfg.model.layers);
  put("model.heads", cfg.model.heads);
  put("model.ffn", cfg.model.ffn);
  put("model.max_seq", cfg.model.max_seq);
  put("model.state_hidden", cfg.model.state_hidden);
  put("model.action_hidden", cfg.model.action_hidden);
  put("finetune.epochs", cfg.finetune.epochs);
  put("finetune.batch", cfg.finetune.batch);
  put("finetune.lr", cfg.finetune.lr);
  put("finetune.w_text", cfg.finetune.w_text);
  put("finetune.w_state", cfg.finetune.w_state);
  put("finetune.w_action", cfg.finetune.w_action);
  put("finetune.w_stop", cfg.finetune.w_stop);
  put("finetune.checkpoint_every", cfg.finetune.checkpoint_every);
  put("imagine.rephrasing", cfg.imagine.rephrasing);
  put("imagine.unseen_easy", cfg.imagine.unseen_easy);
  put("imagine.unseen_hard", cfg.imagine.unseen_hard);
  put("imagine.temperature", cfg.imagine.temperature);
  put("imagine.kappa", cfg.imagine.kappa);
  put("imagine.acceptance_floor", cfg.imagine.acceptance_floor);
  put("imagine.budget_factor", cfg.imagine.budget_factor);
  put("imagine.max_steps", cfg.imagine.max_steps);
  put("rl.bc_epochs", cfg.rl.bc_epochs);
  put("rl.cql_epochs", cfg.rl.cql_epochs);
  put("rl.bc_batch", cfg.rl.bc_batch);
  put("rl.cql_batch", cfg.rl.cql_batch);
  put("rl.bc_lr", cfg.rl.bc_lr);
  put("rl.cql_lr", cfg.rl.cql_lr);
  put("rl.gamma", cfg.rl.gamma);
  put("rl.cql_alpha", cfg.rl.cql_alpha);
  put("rl.polyak", cfg.rl.polyak);
  put("rl.imitation_weight", cfg.rl.imitation_weight);
  put("rl.mix_ratio", cfg.rl.mix_ratio);
  put("rl.steps_per_epoch", cfg.rl.steps_per_epoch);
  put("rl.eval_episodes", cfg.rl.eval_episodes);
  put("eval.episodes", cfg.eval.episodes);
  put("eval.gen_checkpoints", cfg.eval.gen_checkpoints);
  put("eval.gen_samples", cfg.eval.gen_samples);
  put("eval.explanation_samples", cfg.eval.explanation_samples);
  put("ablate.episodes", cfg.ablate.episodes);
  put("ablate.epochs", cfg.ablate.epochs);
  put("ablate.last_k", cfg.ablate.last_k);
  put("ablate.gen_per_checkpoint", cfg.ablate.gen_per_checkpoint);
  put("ablate.imagined", cfg.ablate.imagined);
  put("ablate.policy_eval", cfg.ablate.policy_eval);
  put("seed", cfg.seed);
  {
    std::ostringstream os;
    for (size_t i = 0; i < cfg.rl_seeds.size(); ++i) os << (i ? "," : "") << cfg.rl_seeds[i];
    kv["rl_seeds"] = os.str();
  }
  {
    std::ostringstream os;
    for (size_t i = 0; i < cfg.arms.size(); ++i) os << (i ? "," : "") << cfg.arms[i];
    kv["arms"] = os.str();
  }
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(canonical_config(cfg)); }

namespace {

// --- artifact bookkeeping ---

uint64_t file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MissingInputError("cannot hash missing file: " + p.string());
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64_bytes(buf, static_cast<size_t>(in.gcount()), h);
  }
  return h;
}

struct StageIo {
  const RunConfig* cfg = nullptr;
  std::string stage;
  std::map<std::string, std::string> inputs;   // relpath -> hash hex
  std::map<std::string, std::string> outputs;  // relpath -> hash hex

  fs::path root() const { return cfg->out_dir; }

  // Checks an input produced by `producer` exists; records its hash and warns
  // when the producer's manifest disagrees (stale artifact).
  void need(const std::string& rel, const std::string& producer) {
    const fs::path p = root() / rel;
    if (!fs::exists(p))
      throw MissingInputError("stage '" + stage + "' needs missing input '" + rel +
                              "'; run stage '" + producer + "' first");
    const std::string h = hash_hex(file_hash(p));
    inputs[rel] = h;
    const fs::path manifest = root() / "manifests" / (producer + ".json");
    if (fs::exists(manifest)) {
      std::ifstream in(manifest);
      json j = json::parse(in);
      if (j.contains("outputs") && j["outputs"].contains(rel) &&
          j["outputs"][rel].get<std::string>() != h) {
        std::cerr << "warning: input '" << rel << "' does not match the hash recorded by '"
                  << producer << "' (stale artifact?)\n";
      }
    }
  }

  void produced(const std::string& rel) {
    outputs[rel] = hash_hex(file_hash(root() / rel));
  }

  void write_manifest() const {
    json j;
    j["stage"] = stage;
    j["tool_version"] = kToolVersion;
    j["config_hash"] = hash_hex(config_hash(*cfg));
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    fs::create_directories(root() / "manifests");
    std::ofstream out(root() / "manifests" / (stage + ".json"), std::ios::binary);
    out << j.dump(2) << "\n";
  }
};

// One writer per artifact directory.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    if (fs::exists(path_))
      throw ConfigError("artifact directory is locked by another writer: " + path_.string());
    std::ofstream out(path_);
    out << "rollforge\n";
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  fs::path path_;
};

std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

lm::ModelConfig model_config(const RunConfig& cfg, int vocab_size) {
  lm::ModelConfig mc;
  mc.vocab_size = vocab_size;
  mc.dim = cfg.model.dim;
  mc.layers = cfg.model.layers;
  mc.heads = cfg.model.heads;
  mc.ffn_dim = cfg.model.ffn;
  mc.max_seq = cfg.model.max_seq;
  mc.state_hidden = cfg.model.state_hidden;
  mc.action_hidden = cfg.model.action_hidden;
  mc.seed = derive_seed(cfg.seed, "model-init");
  return mc;
}

text::NovelSetOptions novel_opts(const RunConfig& cfg) {
  text::NovelSetOptions opts;
  opts.max_compose2 = cfg.corpus.max_compose2;
  opts.max_compose3 = cfg.corpus.max_compose3;
  return opts;
}

std::vector<std::pair<std::string, env::GoalSpec>> goal_set_for(const RunConfig& cfg,
                                                                env::GoalLevel level) {
  if (level == env::GoalLevel::Offline) {
    std::vector<std::pair<std::string, env::GoalSpec>> out;
    for (size_t c = 0; c < text::enumerate_configurations().size(); ++c) {
      for (size_t p = 0; p < text::train_patterns().size(); ++p) {
        auto g = text::offline_goal(c, p);
        out.emplace_back(g.text, std::move(g));
      }
    }
    return out;
  }
  return text::novel_goal_set(level, novel_opts(cfg));
}

const std::vector<env::GoalLevel> kAllLevels = {
    env::GoalLevel::Offline, env::GoalLevel::Rephrasing, env::GoalLevel::UnseenEasy,
    env::GoalLevel::UnseenHard};

const std::vector<env::GoalLevel> kImagineLevels = {
    env::GoalLevel::Rephrasing, env::GoalLevel::UnseenEasy, env::GoalLevel::UnseenHard};

std::string level_file(env::GoalLevel level) {
  return std::string("imagine/") + env::level_name(level) + ".jsonl";
}

// Corpus level whose imaginary data backs a KALM policy evaluated at `level`;
// the seen-task panel reuses the unseen-easy corpus.
env::GoalLevel kalm_corpus_for(env::GoalLevel level) {
  return level == env::GoalLevel::Offline ? env::GoalLevel::UnseenEasy : level;
}

std::string policy_file(const std::string& arm, env::GoalLevel corpus_level, uint64_t seed) {
  std::string name = "policies/" + arm;
  if (arm == "bc_kalm" || arm == "cql_kalm")
    name += std::string("__") + env::level_name(corpus_level);
  return name + "__seed" + std::to_string(seed) + ".ckpt";
}

// --- stages ---

void stage_gen_data(const RunConfig& cfg, StageIo& io) {
  fs::create_directories(io.root() / "dataset");
  fs::create_directories(io.root() / "corpora");
  const uint64_t seed = derive_seed(cfg.seed, "gen-data");

  const auto sampler = [](Rng& rng) { return text::sample_offline_goal(rng); };
  const auto train = env::collect_dataset(cfg.data.episodes, cfg.env, seed, sampler);
  env::write_episodes(train, (io.root() / "dataset/episodes.jsonl").string());
  const auto held =
      env::collect_dataset(cfg.data.eval_episodes, cfg.env, derive_seed(seed, "held-out"),
                           sampler);
  env::write_episodes(held, (io.root() / "dataset/eval_episodes.jsonl").string());

  const auto vocab = text::build_vocabulary();
  vocab.save((io.root() / "dataset/vocab.txt").string());
  text::write_corpus_files((io.root() / "corpora").string());

  io.produced("dataset/episodes.jsonl");
  io.produced("dataset/eval_episodes.jsonl");
  io.produced("dataset/vocab.txt");
  for (const char* f : {"train.txt", "rephrase.txt", "unseen_easy.txt", "hard_clause.txt",
                        "hard_line.txt", "hard_gather.txt"})
    io.produced(std::string("corpora/") + f);
}

void stage_build_instructions(const RunConfig& cfg, StageIo& io) {
  io.need("dataset/episodes.jsonl", "gen-data");
  io.need("dataset/vocab.txt", "gen-data");
  fs::create_directories(io.root() / "instructions");
  const auto vocab = text::Vocabulary::load((io.root() / "dataset/vocab.txt").string());
  const auto episodes = env::read_episodes((io.root() / "dataset/episodes.jsonl").string());
  const auto samples = lm::build_instruction_dataset(
      episodes, vocab, derive_seed(cfg.seed, "build-instructions"));
  lm::write_samples(samples, (io.root() / "instructions/instructions.jsonl").string());
  io.produced("instructions/instructions.jsonl");
}

void stage_finetune(const RunConfig& cfg, StageIo& io) {
  io.need("instructions/instructions.jsonl", "build-instructions");
  io.need("dataset/vocab.txt", "gen-data");
  fs::create_directories(io.root() / "model");
  const auto vocab = text::Vocabulary::load((io.root() / "dataset/vocab.txt").string());
  const auto samples =
      lm::read_samples((io.root() / "instructions/instructions.jsonl").string());

  lm::GroundedModel<float> model(model_config(cfg, vocab.size()));
  lm::FinetuneConfig fc;
  fc.epochs = cfg.finetune.epochs;
  fc.batch_size = cfg.finetune.batch;
  fc.lr = cfg.finetune.lr;
  fc.weights = {cfg.finetune.w_text, cfg.finetune.w_state, cfg.finetune.w_action,
                cfg.finetune.w_stop};
  fc.seed = derive_seed(cfg.seed, "finetune");

  std::vector<std::string> ckpts;
  const auto log = lm::finetune(model, samples, fc,
                                [&](int epoch, lm::GroundedModel<float>& m) {
                                  if (cfg.finetune.checkpoint_every <= 0) return;
                                  if (epoch % cfg.finetune.checkpoint_every != 0 &&
                                      epoch != fc.epochs)
                                    return;
                                  char name[64];
                                  std::snprintf(name, sizeof(name), "model/epoch_%03d.ckpt",
                                                epoch);
                                  nn::save_checkpoint(m.params(), (io.root() / name).string());
                                  ckpts.emplace_back(name);
                                });
  nn::save_checkpoint(model.params(), (io.root() / "model/final.ckpt").string());

  {
    std::ofstream out(io.root() / "model/metrics.csv", std::ios::binary);
    out << "epoch,task,loss\n";
    for (const auto& em : log) {
      for (int t = 0; t < 4; ++t) {
        if (em.task_samples[t] == 0) continue;
        out << em.epoch << "," << lm::task_name(static_cast<lm::Task>(t)) << ","
            << csv_num(em.task_loss[t]) << "\n";
      }
      out << em.epoch << ",mean," << csv_num(em.mean_loss) << "\n";
    }
  }
  {
    json j;
    j["dim"] = cfg.model.dim;
    j["layers"] = cfg.model.layers;
    j["heads"] = cfg.model.heads;
    j["ffn"] = cfg.model.ffn;
    j["max_seq"] = cfg.model.max_seq;
    j["state_hidden"] = cfg.model.state_hidden;
    j["action_hidden"] = cfg.model.action_hidden;
    j["vocab_size"] = vocab.size();
    j["vocab_hash"] = hash_hex(vocab.hash());
    j["epochs"] = cfg.finetune.epochs;
    j["batch"] = cfg.finetune.batch;
    j["lr"] = cfg.finetune.lr;
    j["seed"] = derive_seed(cfg.seed, "finetune");
    j["param_count"] = model.params().param_count();
    std::ofstream out(io.root() / "model/manifest.json", std::ios::binary);
    out << j.dump(2) << "\n";
  }
  io.produced("model/final.ckpt");
  io.produced("model/metrics.csv");
  io.produced("model/manifest.json");
  for (const auto& c : ckpts) io.produced(c);
}

void stage_imagine(const RunConfig& cfg, StageIo& io) {
  io.need("model/final.ckpt", "finetune");
  io.need("dataset/vocab.txt", "gen-data");
  fs::create_directories(io.root() / "imagine");
  const auto vocab = text::Vocabulary::load((io.root() / "dataset/vocab.txt").string());
  lm::GroundedModel<float> model(model_config(cfg, vocab.size()));
  nn::load_checkpoint(model.params(), (io.root() / "model/final.ckpt").string());

  imagine::GenerateConfig gen;
  gen.max_steps = cfg.imagine.max_steps;
  gen.temperature = cfg.imagine.temperature;
  imagine::FilterConfig filter;
  filter.kappa = cfg.imagine.kappa;
  filter.acceptance_floor = cfg.imagine.acceptance_floor;
  filter.budget_factor = cfg.imagine.budget_factor;

  std::ofstream rates(io.root() / "imagine/acceptance.csv", std::ios::binary);
  rates << "level,requested,attempts,acceptance_rate\n";
  for (const auto level : kImagineLevels) {
    const int count = level == env::GoalLevel::Rephrasing  ? cfg.imagine.rephrasing
                      : level == env::GoalLevel::UnseenEasy ? cfg.imagine.unseen_easy
                                                            : cfg.imagine.unseen_hard;
    const auto result = imagine::generate_corpus(
        model, level, count, vocab, cfg.env, gen, filter,
        derive_seed(cfg.seed, std::string("imagine-") + env::level_name(level)),
        novel_opts(cfg));
    env::write_episodes(result.rollouts, (io.root() / level_file(level)).string());
    rates << env::level_name(level) << "," << count << "," << result.attempts << ","
          << csv_num(result.acceptance_rate) << "\n";
    io.produced(level_file(level));
  }
  rates.close();
  io.produced("imagine/acceptance.csv");
}

void stage_train_policy(const RunConfig& cfg, StageIo& io) {
  io.need("dataset/episodes.jsonl", "gen-data");
  io.need("dataset/vocab.txt", "gen-data");
  const bool any_kalm =
      std::any_of(cfg.arms.begin(), cfg.arms.end(),
                  [](const std::string& a) { return a == "bc_kalm" || a == "cql_kalm"; });
  if (any_kalm)
    for (const auto level : kImagineLevels) io.need(level_file(level), "imagine");

  fs::create_directories(io.root() / "policies");
  const auto vocab = text::Vocabulary::load((io.root() / "dataset/vocab.txt").string());
  const auto episodes = env::read_episodes((io.root() / "dataset/episodes.jsonl").string());
  const auto real = rl::TransitionPool::from_episodes(episodes, vocab);
  std::map<env::GoalLevel, rl::TransitionPool> imag;
  if (any_kalm) {
    for (const auto level : kImagineLevels) {
      imag[level] = rl::TransitionPool::from_episodes(
          env::read_episodes((io.root() / level_file(level)).string()), vocab);
    }
  }
  const rl::TransitionPool empty_pool;

  std::map<env::GoalLevel, std::vector<std::pair<std::string, env::GoalSpec>>> goal_sets;
  for (const auto level : kAllLevels) goal_sets[level] = goal_set_for(cfg, level);

  std::ofstream success_log(io.root() / "policies/success_log.csv", std::ios::binary);
  success_log << "arm,level,seed,epoch,success\n";
  std::ofstream loss_log(io.root() / "policies/loss_log.csv", std::ios::binary);
  loss_log << "arm,corpus,seed,epoch,loss,td,conservative\n";

  auto train_one = [&](const std::string& arm, env::GoalLevel corpus_level, uint64_t seed) {
    const bool is_bc = arm == "bc" || arm == "bc_kalm";
    const bool is_kalm = arm == "bc_kalm" || arm == "cql_kalm";
    const rl::TransitionPool& pool_imag = is_kalm ? imag.at(corpus_level) : empty_pool;

    rl::RlTrainConfig rc;
    rc.epochs = is_bc ? cfg.rl.bc_epochs : cfg.rl.cql_epochs;
    rc.batch_size = is_bc ? cfg.rl.bc_batch : cfg.rl.cql_batch;
    rc.lr = is_bc ? cfg.rl.bc_lr : cfg.rl.cql_lr;
    rc.gamma = cfg.rl.gamma;
    rc.cql_alpha = cfg.rl.cql_alpha;
    rc.polyak = cfg.rl.polyak;
    rc.imitation_weight = cfg.rl.imitation_weight;
    rc.mix_ratio = cfg.rl.mix_ratio;
    rc.steps_per_epoch = cfg.rl.steps_per_epoch;
    rc.seed = derive_seed(derive_seed(cfg.seed, "train-policy"),
                          arm + "-" + env::level_name(corpus_level)) ^
              seed;

    rl::PolicyConfig pc;
    pc.vocab_size = vocab.size();
    pc.seed = rc.seed ^ 0x9e3779b97f4a7c15ull;
    rl::PolicyNet<float> policy(pc);

    // interleaved per-epoch evaluation: baselines cover every level, KALM
    // arms cover their corpus level (plus the seen level for unseen_easy)
    std::vector<env::GoalLevel> eval_levels;
    if (!is_kalm) {
      eval_levels = kAllLevels;
    } else {
      eval_levels.push_back(corpus_level);
      if (corpus_level == env::GoalLevel::UnseenEasy)
        eval_levels.push_back(env::GoalLevel::Offline);
    }
    const std::string arm_label =
        is_kalm ? arm + "__" + env::level_name(corpus_level) : arm;
    rl::RlEpochHook hook = [&](int epoch, rl::PolicyNet<float>& net, rl::RlEpochLog& el) {
      eval::PolicyHandle handle{&net, is_bc ? rl::PolicyAlgo::Bc : rl::PolicyAlgo::Cql};
      for (const auto level : eval_levels) {
        const double rate = eval::evaluate_success(
            handle, goal_sets.at(level), vocab, cfg.env, cfg.rl.eval_episodes,
            derive_seed(rc.seed, std::string("eval-") + env::level_name(level)) ^
                static_cast<uint64_t>(epoch));
        success_log << arm << "," << env::level_name(level) << "," << seed << "," << epoch
                    << "," << csv_num(rate) << "\n";
        if (level == eval_levels.front()) el.eval_success = rate;
      }
      loss_log << arm_label << "," << env::level_name(corpus_level) << "," << seed << ","
               << epoch << "," << csv_num(el.loss) << "," << csv_num(el.td) << ","
               << csv_num(el.conservative) << "\n";
    };

    if (is_bc)
      rl::bc_train(policy, real, pool_imag, rc, hook);
    else
      rl::cql_train(policy, real, pool_imag, rc, hook);

    const std::string rel = policy_file(arm, corpus_level, seed);
    nn::save_checkpoint(policy.params(), (io.root() / rel).string());
    io.produced(rel);
  };

  for (const auto& arm : cfg.arms) {
    const bool is_kalm = arm == "bc_kalm" || arm == "cql_kalm";
    for (uint64_t seed : cfg.rl_seeds) {
      if (is_kalm) {
        for (const auto level : kImagineLevels) train_one(arm, level, seed);
      } else {
        train_one(arm, env::GoalLevel::Offline, seed);
      }
    }
  }
  success_log.close();
  loss_log.close();
  io.produced("policies/success_log.csv");
  io.produced("policies/loss_log.csv");
}

void stage_evaluate(const RunConfig& cfg, StageIo& io) {
  io.need("policies/success_log.csv", "train-policy");
  io.need("model/final.ckpt", "finetune");
  io.need("dataset/vocab.txt", "gen-data");
  io.need("dataset/eval_episodes.jsonl", "gen-data");
  fs::create_directories(io.root() / "eval");

  const auto vocab = text::Vocabulary::load((io.root() / "dataset/vocab.txt").string());
  eval::EvalReport report;
  report.seeds = cfg.rl_seeds;
  report.config_hash = config_hash(cfg);

  // success curves come from the interleaved training evaluation
  {
    std::ifstream in(io.root() / "policies/success_log.csv");
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string arm, level, seed, epoch, success;
      std::getline(ss, arm, ',');
      std::getline(ss, level, ',');
      std::getline(ss, seed, ',');
      std::getline(ss, epoch, ',');
      std::getline(ss, success, ',');
      report.success_rows.push_back({level, arm, std::stoull(seed), std::stoi(epoch),
                                     std::stod(success)});
    }
  }

  // generation accuracy over evenly spaced fine-tuning checkpoints
  const auto held =
      env::read_episodes((io.root() / "dataset/eval_episodes.jsonl").string());
  const auto epochs = eval::checkpoint_epochs(cfg.finetune.epochs, cfg.eval.gen_checkpoints);
  const auto easy_goals = text::novel_goal_set(env::GoalLevel::UnseenEasy);
  for (const int epoch : epochs) {
    char name[64];
    std::snprintf(name, sizeof(name), "model/epoch_%03d.ckpt", epoch);
    if (!fs::exists(io.root() / name)) continue;
    io.need(name, "finetune");
    lm::GroundedModel<float> model(model_config(cfg, vocab.size()));
    nn::load_checkpoint(model.params(), (io.root() / name).string());
    imagine::GenerateConfig gen;
    gen.temperature = 0.0;
    std::vector<env::Episode> rollouts;
    Rng rng(derive_seed(cfg.seed, "evaluate-gen") ^ static_cast<uint64_t>(epoch));
    for (int i = 0; i < cfg.eval.gen_samples; ++i) {
      const auto& goal = easy_goals[rng.uniform_index(easy_goals.size())].second;
      rollouts.push_back(
          imagine::generate_rollout(model, goal, vocab, cfg.env, gen, rng.next_u64()));
    }
    const auto acc = eval::generation_accuracy(rollouts, cfg.env);
    report.generation_rows.push_back({"model", 0, epoch, acc.state_match, acc.action_match});
  }

  // explanation accuracy on seen (training) and unseen (held-out) rollouts
  {
    lm::GroundedModel<float> model(model_config(cfg, vocab.size()));
    nn::load_checkpoint(model.params(), (io.root() / "model/final.ckpt").string());
    io.need("dataset/episodes.jsonl", "gen-data");
    const auto train_eps =
        env::read_episodes((io.root() / "dataset/episodes.jsonl").string());
    report.explanation_rows.push_back(
        {true, 0,
         eval::explanation_accuracy(model, train_eps, vocab, cfg.eval.explanation_samples,
                                    derive_seed(cfg.seed, "evaluate-expl-seen"))});
    report.explanation_rows.push_back(
        {false, 0,
         eval::explanation_accuracy(model, held, vocab, cfg.eval.explanation_samples,
                                    derive_seed(cfg.seed, "evaluate-expl-unseen"))});
  }

  const auto files = eval::emit_report(report, (io.root() / "eval").string());
  for (const auto& f : files)
    io.produced(fs::relative(f, io.root()).generic_string());
}

void stage_ablate(const RunConfig& cfg, StageIo& io) {
  io.need("dataset/vocab.txt", "gen-data");
  fs::create_directories(io.root() / "ablation");
  const auto vocab = text::Vocabulary::load((io.root() / "dataset/vocab.txt").string());

  eval::AblationConfig ac;
  ac.seeds = cfg.rl_seeds;
  ac.n_train_episodes = cfg.ablate.episodes;
  ac.model = model_config(cfg, vocab.size());
  ac.finetune.epochs = cfg.ablate.epochs;
  ac.finetune.batch_size = cfg.finetune.batch;
  ac.finetune.lr = cfg.finetune.lr;
  ac.last_k_epochs = cfg.ablate.last_k;
  ac.gen_per_checkpoint = cfg.ablate.gen_per_checkpoint;
  ac.imagined_count = cfg.ablate.imagined;
  ac.policy_eval_episodes = cfg.ablate.policy_eval;
  ac.bc.epochs = cfg.rl.bc_epochs;
  ac.bc.batch_size = cfg.rl.bc_batch;
  ac.bc.lr = cfg.rl.bc_lr;
  ac.bc.steps_per_epoch = cfg.rl.steps_per_epoch;
  ac.bc.imitation_weight = cfg.rl.imitation_weight;
  ac.bc.mix_ratio = cfg.rl.mix_ratio;
  ac.env = cfg.env;

  const auto report = eval::run_ablation(ac, vocab);
  {
    std::ofstream out(io.root() / "ablation/ablation.csv", std::ios::binary);
    out << "arm,seed,epoch,state_match,action_match\n";
    for (const auto& arm : report.arms) {
      for (size_t i = 0; i < arm.checkpoint_epochs.size(); ++i) {
        out << arm.arm << "," << arm.seed << "," << arm.checkpoint_epochs[i] << ","
            << csv_num(arm.state_match[i]) << "," << csv_num(arm.action_match[i]) << "\n";
      }
    }
  }
  {
    std::ofstream out(io.root() / "ablation/ablation_success.csv", std::ios::binary);
    out << "arm,seed,level,success\n";
    for (const auto& arm : report.arms)
      for (const auto& [level, rate] : arm.success_per_level)
        out << arm.arm << "," << arm.seed << "," << level << "," << csv_num(rate) << "\n";
  }
  {
    std::ofstream out(io.root() / "ablation/ablation_summary.csv", std::ios::binary);
    out << "arm,mean_state_match\n";
    out << "with_iff," << csv_num(report.with_iff_state_match) << "\n";
    out << "without_iff," << csv_num(report.without_iff_state_match) << "\n";
  }
  io.produced("ablation/ablation.csv");
  io.produced("ablation/ablation_success.csv");
  io.produced("ablation/ablation_summary.csv");
}

}  // namespace

std::vector<std::string> stage_outputs(const RunConfig& cfg, const std::string& stage) {
  const fs::path manifest = fs::path(cfg.out_dir) / "manifests" / (stage + ".json");
  if (!fs::exists(manifest))
    throw MissingInputError("no manifest for stage '" + stage + "'");
  std::ifstream in(manifest);
  const json j = json::parse(in);
  std::vector<std::string> out;
  for (const auto& [k, v] : j.at("outputs").items()) out.push_back(k);
  return out;
}

void run_stage(const RunConfig& cfg, const std::string& stage) {
  cfg.validate();
  DirLock lock(cfg.out_dir);
  StageIo io;
  io.cfg = &cfg;
  io.stage = stage;
  if (stage == "gen-data")
    stage_gen_data(cfg, io);
  else if (stage == "build-instructions")
    stage_build_instructions(cfg, io);
  else if (stage == "finetune")
    stage_finetune(cfg, io);
  else if (stage == "imagine")
    stage_imagine(cfg, io);
  else if (stage == "train-policy")
    stage_train_policy(cfg, io);
  else if (stage == "evaluate")
    stage_evaluate(cfg, io);
  else if (stage == "ablate")
    stage_ablate(cfg, io);
  else
    throw ConfigError("unknown stage: " + stage);
  io.write_manifest();
}

void run_all(const RunConfig& cfg) {
  for (const char* stage : {"gen-data", "build-instructions", "finetune", "imagine",
                            "train-policy", "evaluate"})
    run_stage(cfg, stage);
}

}  // namespace rollforge::pipeline
