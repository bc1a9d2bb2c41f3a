#include "config_yaml.hpp"

#include <yaml-cpp/yaml.h>

#include <set>

namespace rollforge::tools {

using pipeline::RunConfig;

namespace {

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& section) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError("section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
  }
}

template <class T>
void get(const YAML::Node& node, const char* key, T* out) {
  if (node && node[key]) *out = node[key].as<T>();
}

void get_inf(const YAML::Node& node, const char* key, double* out) {
  if (!node || !node[key]) return;
  const auto s = node[key].as<std::string>();
  if (s == "inf" || s == ".inf" || s == "infinity") {
    *out = std::numeric_limits<double>::infinity();
    return;
  }
  *out = node[key].as<double>();
}

}  // namespace

RunConfig load_config(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw MissingInputError("cannot open config file: " + path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  check_keys(root,
             {"env", "data", "corpus", "model", "finetune", "imagine", "rl", "eval",
              "ablate", "seed", "out", "rl_seeds", "arms"},
             "(top level)");

  RunConfig cfg;
  try {
    const auto env = root["env"];
    check_keys(env,
               {"arena_min", "arena_max", "ball_radius", "step_size", "min_separation",
                "horizon", "margin", "line_tolerance", "gather_radius", "success_bonus"},
               "env");
    get(env, "arena_min", &cfg.env.arena_min);
    get(env, "arena_max", &cfg.env.arena_max);
    get(env, "ball_radius", &cfg.env.ball_radius);
    get(env, "step_size", &cfg.env.step_size);
    get(env, "min_separation", &cfg.env.min_separation);
    get(env, "horizon", &cfg.env.horizon);
    get(env, "margin", &cfg.env.margin);
    get(env, "line_tolerance", &cfg.env.line_tolerance);
    get(env, "gather_radius", &cfg.env.gather_radius);
    get(env, "success_bonus", &cfg.env.success_bonus);

    const auto data = root["data"];
    check_keys(data, {"episodes", "eval_episodes"}, "data");
    get(data, "episodes", &cfg.data.episodes);
    get(data, "eval_episodes", &cfg.data.eval_episodes);

    const auto corpus = root["corpus"];
    check_keys(corpus, {"max_compose2", "max_compose3"}, "corpus");
    get(corpus, "max_compose2", &cfg.corpus.max_compose2);
    get(corpus, "max_compose3", &cfg.corpus.max_compose3);

    const auto model = root["model"];
    check_keys(model,
               {"dim", "layers", "heads", "ffn", "max_seq", "state_hidden", "action_hidden"},
               "model");
    get(model, "dim", &cfg.model.dim);
    get(model, "layers", &cfg.model.layers);
    get(model, "heads", &cfg.model.heads);
    get(model, "ffn", &cfg.model.ffn);
    get(model, "max_seq", &cfg.model.max_seq);
    get(model, "state_hidden", &cfg.model.state_hidden);
    get(model, "action_hidden", &cfg.model.action_hidden);

    const auto ft = root["finetune"];
    check_keys(ft,
               {"epochs", "batch", "lr", "w_text", "w_state", "w_action", "w_stop",
                "checkpoint_every"},
               "finetune");
    get(ft, "epochs", &cfg.finetune.epochs);
    get(ft, "batch", &cfg.finetune.batch);
    get(ft, "lr", &cfg.finetune.lr);
    get(ft, "w_text", &cfg.finetune.w_text);
    get(ft, "w_state", &cfg.finetune.w_state);
    get(ft, "w_action", &cfg.finetune.w_action);
    get(ft, "w_stop", &cfg.finetune.w_stop);
    get(ft, "checkpoint_every", &cfg.finetune.checkpoint_every);

    const auto im = root["imagine"];
    check_keys(im,
               {"rephrasing", "unseen_easy", "unseen_hard", "temperature", "kappa",
                "acceptance_floor", "budget_factor", "max_steps"},
               "imagine");
    get(im, "rephrasing", &cfg.imagine.rephrasing);
    get(im, "unseen_easy", &cfg.imagine.unseen_easy);
    get(im, "unseen_hard", &cfg.imagine.unseen_hard);
    get(im, "temperature", &cfg.imagine.temperature);
    get_inf(im, "kappa", &cfg.imagine.kappa);
    get(im, "acceptance_floor", &cfg.imagine.acceptance_floor);
    get(im, "budget_factor", &cfg.imagine.budget_factor);
    get(im, "max_steps", &cfg.imagine.max_steps);

    const auto rl = root["rl"];
    check_keys(rl,
               {"bc_epochs", "cql_epochs", "bc_batch", "cql_batch", "bc_lr", "cql_lr",
                "gamma", "cql_alpha", "polyak", "imitation_weight", "mix_ratio",
                "steps_per_epoch", "eval_episodes"},
               "rl");
    get(rl, "bc_epochs", &cfg.rl.bc_epochs);
    get(rl, "cql_epochs", &cfg.rl.cql_epochs);
    get(rl, "bc_batch", &cfg.rl.bc_batch);
    get(rl, "cql_batch", &cfg.rl.cql_batch);
    get(rl, "bc_lr", &cfg.rl.bc_lr);
    get(rl, "cql_lr", &cfg.rl.cql_lr);
    get(rl, "gamma", &cfg.rl.gamma);
    get(rl, "cql_alpha", &cfg.rl.cql_alpha);
    get(rl, "polyak", &cfg.rl.polyak);
    get(rl, "imitation_weight", &cfg.rl.imitation_weight);
    get(rl, "mix_ratio", &cfg.rl.mix_ratio);
    get(rl, "steps_per_epoch", &cfg.rl.steps_per_epoch);
    get(rl, "eval_episodes", &cfg.rl.eval_episodes);

    const auto ev = root["eval"];
    check_keys(ev, {"episodes", "gen_checkpoints", "gen_samples", "explanation_samples"},
               "eval");
    get(ev, "episodes", &cfg.eval.episodes);
    get(ev, "gen_checkpoints", &cfg.eval.gen_checkpoints);
    get(ev, "gen_samples", &cfg.eval.gen_samples);
    get(ev, "explanation_samples", &cfg.eval.explanation_samples);

    const auto ab = root["ablate"];
    check_keys(ab,
               {"episodes", "epochs", "last_k", "gen_per_checkpoint", "imagined",
                "policy_eval"},
               "ablate");
    get(ab, "episodes", &cfg.ablate.episodes);
    get(ab, "epochs", &cfg.ablate.epochs);
    get(ab, "last_k", &cfg.ablate.last_k);
    get(ab, "gen_per_checkpoint", &cfg.ablate.gen_per_checkpoint);
    get(ab, "imagined", &cfg.ablate.imagined);
    get(ab, "policy_eval", &cfg.ablate.policy_eval);

    get(root, "seed", &cfg.seed);
    get(root, "out", &cfg.out_dir);
    if (root["rl_seeds"]) cfg.rl_seeds = root["rl_seeds"].as<std::vector<uint64_t>>();
    if (root["arms"]) cfg.arms = root["arms"].as<std::vector<std::string>>();
  } catch (const YAML::Exception& e) {
    throw ConfigError("config value error: " + std::string(e.what()));
  }
  cfg.validate();
  return cfg;
}

}  // namespace rollforge::tools
