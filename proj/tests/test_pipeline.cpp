#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rollforge/pipeline.hpp"

using namespace rollforge;
using namespace rollforge::pipeline;
namespace fs = std::filesystem;

namespace {

RunConfig micro_config(const std::string& out) {
  RunConfig cfg;
  cfg.data.episodes = 40;
  cfg.data.eval_episodes = 10;
  cfg.corpus.max_compose2 = 40;
  cfg.corpus.max_compose3 = 40;
  cfg.model.dim = 16;
  cfg.model.layers = 1;
  cfg.model.heads = 2;
  cfg.model.ffn = 32;
  cfg.model.state_hidden = 16;
  cfg.model.action_hidden = 16;
  cfg.finetune.epochs = 2;
  cfg.finetune.batch = 16;
  cfg.imagine.rephrasing = 5;
  cfg.imagine.unseen_easy = 5;
  cfg.imagine.unseen_hard = 5;
  cfg.imagine.max_steps = 3;
  cfg.rl.bc_epochs = 1;
  cfg.rl.cql_epochs = 1;
  cfg.rl.steps_per_epoch = 4;
  cfg.rl.bc_batch = 16;
  cfg.rl.cql_batch = 8;
  cfg.rl.eval_episodes = 4;
  cfg.eval.episodes = 4;
  cfg.eval.gen_samples = 5;
  cfg.eval.explanation_samples = 5;
  cfg.rl_seeds = {0};
  cfg.seed = 3;
  cfg.out_dir = out;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config hash is stable and ignores the artifact directory") {
  RunConfig a = micro_config("/tmp/a");
  RunConfig b = micro_config("/tmp/b");
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 4;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("stages demand their inputs and name the producing stage") {
  const auto dir = fs::temp_directory_path() / "rollforge_pipe_missing";
  fs::remove_all(dir);
  const RunConfig cfg = micro_config(dir.string());
  try {
    run_stage(cfg, "train-policy");
    FAIL("expected MissingInputError");
  } catch (const MissingInputError& e) {
    const std::string what = e.what();
    CHECK(what.find("gen-data") != std::string::npos);
  }
  // kalm arms need the imagine stage by name
  {
    RunConfig c2 = cfg;
    run_stage(c2, "gen-data");
    try {
      run_stage(c2, "train-policy");
      FAIL("expected MissingInputError");
    } catch (const MissingInputError& e) {
      CHECK(std::string(e.what()).find("imagine") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(run_stage(cfg, "no-such-stage"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("run-all produces every artifact and is byte-deterministic") {
  const auto dir1 = fs::temp_directory_path() / "rollforge_pipe_run1";
  const auto dir2 = fs::temp_directory_path() / "rollforge_pipe_run2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);

  run_all(micro_config(dir1.string()));

  // artifact inventory
  for (const char* rel :
       {"dataset/episodes.jsonl", "dataset/eval_episodes.jsonl", "dataset/vocab.txt",
        "corpora/train.txt", "instructions/instructions.jsonl", "model/final.ckpt",
        "model/metrics.csv", "model/manifest.json", "imagine/rephrasing.jsonl",
        "imagine/unseen_easy.jsonl", "imagine/unseen_hard.jsonl", "imagine/acceptance.csv",
        "policies/success_log.csv", "policies/loss_log.csv"}) {
    CAPTURE(rel);
    CHECK(fs::exists(dir1 / rel));
  }
  // four arms of policies: bc, cql (baseline) + three corpus levels per kalm arm
  int n_policies = 0;
  for (const auto& entry : fs::directory_iterator(dir1 / "policies"))
    if (entry.path().extension() == ".ckpt") ++n_policies;
  CHECK(n_policies == 2 + 2 * 3);
  // manifests for every stage in the chain
  for (const char* stage : {"gen-data", "build-instructions", "finetune", "imagine",
                            "train-policy", "evaluate"}) {
    CHECK(fs::exists(dir1 / "manifests" / (std::string(stage) + ".json")));
  }
  // eval report files exist
  bool saw_success_csv = false;
  for (const auto& entry : fs::directory_iterator(dir1 / "eval"))
    if (entry.path().filename().string().rfind("success_", 0) == 0) saw_success_csv = true;
  CHECK(saw_success_csv);

  // second run: identical manifests byte for byte
  run_all(micro_config(dir2.string()));
  for (const char* stage : {"gen-data", "build-instructions", "finetune", "imagine",
                            "train-policy", "evaluate"}) {
    const auto rel = fs::path("manifests") / (std::string(stage) + ".json");
    CHECK(slurp(dir1 / rel) == slurp(dir2 / rel));
  }

  // stage_outputs reads the manifest back
  const auto outs = stage_outputs(micro_config(dir1.string()), "gen-data");
  CHECK(outs.size() >= 8);

  // rerunning a single stage over existing artifacts also reproduces them
  const std::string before = slurp(dir1 / "manifests/imagine.json");
  run_stage(micro_config(dir1.string()), "imagine");
  CHECK(slurp(dir1 / "manifests/imagine.json") == before);

  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("the artifact directory lock rejects concurrent writers") {
  const auto dir = fs::temp_directory_path() / "rollforge_pipe_lock";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / ".lock") << "held\n";
  const RunConfig cfg = micro_config(dir.string());
  CHECK_THROWS_AS(run_stage(cfg, "gen-data"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("ablate stage writes its comparison tables") {
  const auto dir = fs::temp_directory_path() / "rollforge_pipe_ablate";
  fs::remove_all(dir);
  RunConfig cfg = micro_config(dir.string());
  cfg.ablate.episodes = 12;
  cfg.ablate.epochs = 2;
  cfg.ablate.last_k = 1;
  cfg.ablate.gen_per_checkpoint = 4;
  cfg.ablate.imagined = 4;
  cfg.ablate.policy_eval = 2;
  run_stage(cfg, "gen-data");
  run_stage(cfg, "ablate");
  CHECK(fs::exists(dir / "ablation/ablation.csv"));
  CHECK(fs::exists(dir / "ablation/ablation_success.csv"));
  CHECK(fs::exists(dir / "ablation/ablation_summary.csv"));
  const std::string summary = slurp(dir / "ablation/ablation_summary.csv");
  CHECK(summary.find("with_iff") != std::string::npos);
  CHECK(summary.find("without_iff") != std::string::npos);
  fs::remove_all(dir);
}
