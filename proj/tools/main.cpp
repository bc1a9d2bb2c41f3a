#include <CLI11.hpp>
#include <iostream>

#include "config_yaml.hpp"
#include "rollforge/pipeline.hpp"

namespace {

// exit codes: 0 success, 2 config error, 3 missing input, 4 numeric failure
int run(int argc, char** argv) {
  CLI::App app{"rollforge: grounded sequence model + offline RL pipeline"};
  app.require_subcommand(0, 1);
  app.fallthrough();  // global options may follow the subcommand

  std::string config_path;
  std::string out_override;
  std::string stage_override;
  std::vector<std::string> arms_override;
  uint64_t seed_override = 0;
  bool seed_set = false;

  app.add_option("--config", config_path, "YAML run configuration")->required();
  app.add_option("--seed", seed_override, "override the global seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--out", out_override, "override the artifact directory");
  app.add_option("--stage", stage_override, "run a single stage by name");
  app.add_option("--arms", arms_override, "override the policy arm list")->delimiter(',');

  std::map<std::string, CLI::App*> subs;
  for (const auto& name : rollforge::pipeline::stage_names())
    subs[name] = app.add_subcommand(name, "run the " + name + " stage");
  CLI::App* all = app.add_subcommand("run-all", "run the full dependency chain");

  CLI11_PARSE(app, argc, argv);

  auto cfg = rollforge::tools::load_config(config_path);
  if (seed_set) cfg.seed = seed_override;
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (!arms_override.empty()) cfg.arms = arms_override;

  std::string stage = stage_override;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) stage = name;
  if (all->parsed()) {
    if (!stage.empty()) throw rollforge::ConfigError("run-all does not take --stage");
    rollforge::pipeline::run_all(cfg);
    return 0;
  }
  if (stage.empty())
    throw rollforge::ConfigError("pick a stage subcommand, --stage NAME, or run-all");
  rollforge::pipeline::run_stage(cfg, stage);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rollforge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rollforge::MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return 3;
  } catch (const rollforge::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
