#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>

#include "rollforge/episode_io.hpp"
#include "rollforge/evalkit.hpp"

using namespace rollforge;
using namespace rollforge::env;
using namespace rollforge::eval;
using rollforge::text::Vocabulary;

namespace {

const Vocabulary& vocab() {
  static const Vocabulary v = text::build_vocabulary();
  return v;
}

rl::PolicyConfig tiny_policy(uint64_t seed = 3) {
  rl::PolicyConfig pc;
  pc.vocab_size = vocab().size();
  pc.goal_dim = 32;
  pc.enc_layers = 1;
  pc.enc_heads = 2;
  pc.enc_ffn = 64;
  pc.trunk_hidden = 64;
  pc.seed = seed;
  return pc;
}

// Expert wrapped as a policy: evaluates the spec's >= 0.95 bar end to end.
struct ExpertPolicy {
  EnvConfig cfg;
};

// Regex-based second implementation of the explanation judgment.
bool regex_judge(const std::string& explanation, const GoalSpec& g) {
  auto word = [&](const std::string& w) {
    return std::regex_search(explanation,
                             std::regex("(^|[^a-z])" + w + "($|[^a-z])",
                                        std::regex::icase));
  };
  int target = g.target, reference = g.reference;
  GoalDirection dir = g.direction;
  if (g.kind == GoalKind::Compose2 || g.kind == GoalKind::Compose3) {
    target = g.subgoals[0].target;
    reference = g.subgoals[0].reference;
    dir = g.subgoals[0].direction;
  }
  if (!word(kBallColors[target])) return false;
  if (reference >= 0 && !word(kBallColors[reference])) return false;
  bool dir_ok = false;
  for (int d = 0; d < 4; ++d) {
    bool any = false;
    for (const auto& k : text::direction_keywords(static_cast<GoalDirection>(d)))
      if (word(k)) any = true;
    if (d == static_cast<int>(dir)) {
      dir_ok = any;
    } else if (any) {
      return false;
    }
  }
  return dir_ok;
}

}  // namespace

TEST_CASE("displacement test judges absolute_move episodes") {
  EnvConfig cfg;
  const GoalSpec g = make_absolute_goal(1, GoalDirection::Front);
  EnvState from = reset(2, cfg);
  EnvState to = from;
  to.set(1, from.x(1), from.y(1) + 0.09f);  // 0.9 * step
  CHECK(displacement_success(from, to, g, cfg));
  to.set(1, from.x(1), from.y(1) + 0.05f);  // below 0.8 * step
  CHECK_FALSE(displacement_success(from, to, g, cfg));
  // another ball drifting past eps_move spoils it
  to.set(1, from.x(1), from.y(1) + 0.09f);
  to.set(3, from.x(3) + 0.05f, from.y(3));
  CHECK_FALSE(displacement_success(from, to, g, cfg));
}

TEST_CASE("the scripted expert as a policy clears 95% on offline goals") {
  EnvConfig cfg;
  Rng rng(31);
  int n = 200, wins = 0;
  for (int i = 0; i < n; ++i) {
    const GoalSpec g = text::sample_offline_goal(rng);
    EnvState s = reset(rng.next_u64(), cfg);
    bool done = goal_satisfied(s, g, cfg);
    for (int t = 0; t < cfg.horizon && !done; ++t) {
      s = step_index(s, scripted_expert_index(s, g, cfg), cfg);
      done = goal_satisfied(s, g, cfg);
    }
    wins += done;
  }
  CHECK(wins >= int(0.95 * n));
}

TEST_CASE("evaluate_success is deterministic and stays in [0,1]") {
  EnvConfig cfg;
  rl::PolicyNet<float> policy(tiny_policy());
  PolicyHandle handle{&policy, rl::PolicyAlgo::Bc};
  std::vector<std::pair<std::string, GoalSpec>> goals;
  for (size_t c = 0; c < 20; ++c) {
    auto g = text::offline_goal(c, c % 18);
    goals.emplace_back(g.text, g);
  }
  const double r1 = evaluate_success(handle, goals, vocab(), cfg, 60, 5);
  const double r2 = evaluate_success(handle, goals, vocab(), cfg, 60, 5);
  CHECK(r1 == r2);
  CHECK(r1 >= 0.0);
  CHECK(r1 <= 1.0);

  // evaluation never mutates the policy
  std::vector<float> before;
  for (const auto* p : policy.params().blocks())
    before.insert(before.end(), p->w.data(), p->w.data() + p->count());
  evaluate_success(handle, goals, vocab(), cfg, 30, 6);
  std::vector<float> after;
  for (const auto* p : policy.params().blocks())
    after.insert(after.end(), p->w.data(), p->w.data() + p->count());
  CHECK(before == after);
}

TEST_CASE("generation accuracy matches a brute-force rescan of serialized rollouts") {
  EnvConfig cfg;
  // hand-build rollouts with known outcomes
  std::vector<Episode> rollouts;
  Rng rng(8);
  const auto goals = text::novel_goal_set(GoalLevel::UnseenEasy);
  for (int i = 0; i < 60; ++i) {
    Episode ep;
    ep.goal = goals[rng.uniform_index(goals.size())].second;
    ep.provenance = Provenance::Imaginary;
    EnvState s0 = reset(rng.next_u64(), cfg);
    ep.states.push_back(s0);
    // half the time take the correct action, otherwise a random one
    int a;
    if (i % 2 == 0) {
      a = ep.goal.target * kNumDirections + int(direction_compass(ep.goal.direction));
    } else {
      a = rng.uniform_int(0, 39);
    }
    ep.actions.push_back(a);
    ep.states.push_back(step_index(s0, a, cfg));
    ep.rewards.push_back(0.0f);
    rollouts.push_back(std::move(ep));
  }
  const auto acc = generation_accuracy(rollouts, cfg);
  CHECK(acc.n == 60);
  CHECK(acc.action_match >= 0.5);  // at least the constructed half

  // independent rescan from the serialized form
  int action_hits = 0, state_hits = 0;
  for (const auto& ep0 : rollouts) {
    const Episode ep = episode_from_json(episode_to_json(ep0));
    const int ball = ep.actions[0] / 8, dir = ep.actions[0] % 8;
    const int want = int(direction_compass(ep.goal.direction));
    int d = std::abs(dir - want);
    d = std::min(d, 8 - d);
    if (ball == ep.goal.target && d <= 1) ++action_hits;
    if (displacement_success(ep.states[0], ep.states[1], ep.goal, cfg)) ++state_hits;
  }
  CHECK(acc.action_match == doctest::Approx(action_hits / 60.0));
  CHECK(acc.state_match == doctest::Approx(state_hits / 60.0));

  // non-easy goals are rejected
  std::vector<Episode> wrong;
  Episode bad;
  bad.goal = text::offline_goal(0, 0);
  wrong.push_back(bad);
  CHECK_THROWS_AS(generation_accuracy(wrong, cfg), std::invalid_argument);
}

TEST_CASE("explanation judgments match a regex second implementation") {
  const GoalSpec left = make_relative_goal(0, 1, GoalDirection::Left);
  CHECK(explanation_matches("move the red ball to the left of the blue ball", left));
  CHECK_FALSE(explanation_matches("move the red ball to the right of the blue ball", left));
  CHECK_FALSE(explanation_matches("move the red ball to the left", left));  // no reference
  CHECK_FALSE(
      explanation_matches("move the red ball to the left and right of the blue ball", left));

  // dual implementation across a large sample of real and corrupted texts
  Rng rng(17);
  const auto& configs = text::enumerate_configurations();
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    GoalSpec g = configs[rng.uniform_index(configs.size())];
    std::string s;
    switch (rng.uniform_int(0, 3)) {
      case 0: s = text::render_goal(g, text::train_patterns()[rng.uniform_index(18)]); break;
      case 1: {
        GoalSpec other = configs[rng.uniform_index(configs.size())];
        s = text::render_goal(other, text::train_patterns()[rng.uniform_index(18)]);
        break;
      }
      case 2: s = "the balls moved around"; break;
      default: {
        s = text::render_goal(g, text::train_patterns()[rng.uniform_index(18)]);
        s += " backwards";  // inject a contradicting direction word
        break;
      }
    }
    CHECK(explanation_matches(s, g) == regex_judge(s, g));
    ++compared;
  }
  CHECK(compared == 1000);
}

TEST_CASE("checkpoint epochs are evenly spaced") {
  CHECK(checkpoint_epochs(20, 5) == std::vector<int>{4, 8, 12, 16, 20});
  CHECK(checkpoint_epochs(3, 5) == std::vector<int>{1, 2, 3});
  CHECK(checkpoint_epochs(10, 2) == std::vector<int>{5, 10});
}

TEST_CASE("emit_report writes the CSV tables and SVG curves") {
  EvalReport report;
  report.seeds = {0, 1, 2};
  report.config_hash = 0x1234abcd;
  const int epochs = 6;
  for (const char* level : {"offline", "rephrasing", "unseen_easy", "unseen_hard"}) {
    for (uint64_t seed : {0, 1, 2}) {
      for (int e = 1; e <= epochs; ++e) {
        report.success_rows.push_back(
            {level, "bc", seed, e, 0.3 + 0.05 * e + 0.01 * seed});
      }
    }
  }
  report.generation_rows.push_back({"model", 0, 5, 0.4, 0.3});
  report.explanation_rows.push_back({true, 0, 0.9});
  report.explanation_rows.push_back({false, 0, 0.8});

  const auto dir = std::filesystem::temp_directory_path() / "rollforge_report_test";
  std::filesystem::remove_all(dir);
  const auto files = emit_report(report, dir.string());
  CHECK(files.size() >= 8);  // 4 CSVs + 4 level SVGs + generation SVG

  // success csv: 4 levels x 3 seeds x E epochs rows + header
  std::ifstream in(dir / ("success_" + hash_hex(report.config_hash).substr(0, 8) + ".csv"));
  REQUIRE(in.good());
  int lines = 0;
  std::string line, first;
  while (std::getline(in, line)) {
    if (lines == 0) first = line;
    ++lines;
  }
  CHECK(first == "level,arm,seed,epoch,success");
  CHECK(lines == 1 + 4 * 3 * epochs);

  // re-emission is byte-identical
  std::ifstream a(dir / files[0].substr(files[0].rfind('/') + 1), std::ios::binary);
  std::string before((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  emit_report(report, dir.string());
  std::ifstream b(dir / files[0].substr(files[0].rfind('/') + 1), std::ios::binary);
  std::string after((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(before == after);

  // shaded band equals mean +/- std recomputed from the per-seed rows
  std::map<int, std::vector<double>> offline_by_epoch;
  for (const auto& r : report.success_rows)
    if (r.level == "offline") offline_by_epoch[r.epoch].push_back(r.success);
  for (const auto& [e, vals] : offline_by_epoch) {
    double mean = 0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    CHECK(std::sqrt(var / vals.size()) == doctest::Approx(0.01 * std::sqrt(2.0 / 3.0)));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("ablation config validation requires both arms") {
  AblationConfig cfg;
  cfg.without_prompts_arm = false;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
