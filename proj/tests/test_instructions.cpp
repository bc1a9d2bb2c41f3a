#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rollforge/corpus.hpp"
#include "rollforge/instructions.hpp"
#include "rollforge/prompts.hpp"

using namespace rollforge;
using namespace rollforge::env;
using namespace rollforge::lm;
using rollforge::text::Vocabulary;

namespace {

std::vector<Episode> sample_episodes(int n, uint64_t seed = 5) {
  EnvConfig cfg;
  return collect_dataset(n, cfg, seed,
                         [](Rng& rng) { return text::sample_offline_goal(rng); });
}

std::vector<int> text_tokens(const std::vector<ModalElement>& elems, size_t from, size_t to) {
  std::vector<int> out;
  for (size_t i = from; i < to && i < elems.size(); ++i)
    if (elems[i].tag == Modality::Text) out.push_back(elems[i].token);
  return out;
}

}  // namespace

TEST_CASE("instruction dataset is exactly four samples per episode") {
  const Vocabulary vocab = text::build_vocabulary();
  const auto episodes = sample_episodes(25);
  const auto samples = build_instruction_dataset(episodes, vocab, 7);
  CHECK(samples.size() == 100);
  // one of each task per episode
  for (size_t i = 0; i < 25; ++i) {
    CHECK(samples[4 * i + 0].task == Task::Dynamics);
    CHECK(samples[4 * i + 1].task == Task::Explain);
    CHECK(samples[4 * i + 2].task == Task::Generate);
    CHECK(samples[4 * i + 3].task == Task::Consequence);
    for (int k = 0; k < 4; ++k)
      CHECK(samples[4 * i + k].episode_id == static_cast<int64_t>(i));
  }
  CHECK(build_instruction_dataset({}, vocab, 7).empty());

  // determinism in seed
  const auto again = build_instruction_dataset(episodes, vocab, 7);
  REQUIRE(again.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    CHECK(sample_to_json(again[i]) == sample_to_json(samples[i]));
}

TEST_CASE("masks: prompts are never answers, answers form a suffix") {
  const Vocabulary vocab = text::build_vocabulary();
  const auto episodes = sample_episodes(10);
  const auto samples = build_instruction_dataset(episodes, vocab, 3);
  for (const auto& s : samples) {
    s.check_invariants(Vocabulary::kEos, Vocabulary::kEndOfRollout);
    const size_t begin = s.answer_begin();
    CHECK(begin > 0);
    for (size_t i = 0; i < begin; ++i) CHECK_FALSE(s.elements[i].in_answer);
    for (size_t i = begin; i < s.elements.size(); ++i) CHECK(s.elements[i].in_answer);
  }
}

TEST_CASE("dynamics prompt splices state and action into the template") {
  const Vocabulary vocab = text::build_vocabulary();
  const auto episodes = sample_episodes(1);
  const auto& ep = episodes[0];
  const auto s = make_dynamics_sample(ep.states[0], ep.actions[0], ep.states[1], vocab, 0);

  // layout: [prefix tokens] STATE [mid tokens] ACTION [suffix tokens] STATE*
  const auto want_prefix = text::tokenize(text::kDynamicsPrefix, vocab);
  const auto got_prefix = text_tokens(s.elements, 0, want_prefix.size());
  CHECK(got_prefix == want_prefix);
  CHECK(s.elements[want_prefix.size()].tag == Modality::State);
  CHECK_FALSE(s.elements[want_prefix.size()].in_answer);

  const auto& last = s.elements.back();
  CHECK(last.tag == Modality::State);
  CHECK(last.in_answer);
  CHECK(last.state == ep.states[1]);

  int n_actions = 0;
  for (const auto& e : s.elements)
    if (e.tag == Modality::Action) ++n_actions;
  CHECK(n_actions == 1);
  // the colon before the answer survives tokenization
  CHECK(vocab.id(":") != Vocabulary::kUnk);
}

TEST_CASE("generate sample follows STATE (ACTION STATE)+ <eor> and embeds the goal") {
  const Vocabulary vocab = text::build_vocabulary();
  const auto episodes = sample_episodes(6);
  for (const auto& ep : episodes) {
    const auto s = make_generate_sample(ep, vocab, 0);
    s.check_invariants(Vocabulary::kEos, Vocabulary::kEndOfRollout);
    const size_t begin = s.answer_begin();
    CHECK(s.elements[begin].tag == Modality::State);
    CHECK(s.elements.back().token == Vocabulary::kEndOfRollout);
    // answer carries 2T+2 elements
    CHECK(s.elements.size() - begin == 2 * ep.actions.size() + 2);
    // goal text tokens appear in the prompt
    const auto goal_ids = text::tokenize(ep.goal.text, vocab);
    const auto prompt_ids = text_tokens(s.elements, 0, begin);
    bool found = false;
    for (size_t i = 0; i + goal_ids.size() <= prompt_ids.size() && !found; ++i) {
      found = std::equal(goal_ids.begin(), goal_ids.end(), prompt_ids.begin() + i);
    }
    CHECK(found);
  }
}

TEST_CASE("explain sample answers with the goal text and <eos>") {
  const Vocabulary vocab = text::build_vocabulary();
  const auto episodes = sample_episodes(3);
  const auto& ep = episodes[0];
  const auto s = make_explain_sample(ep, vocab, 0);
  s.check_invariants(Vocabulary::kEos, Vocabulary::kEndOfRollout);
  const size_t begin = s.answer_begin();
  const auto answer_ids = text_tokens(s.elements, begin, s.elements.size() - 1);
  CHECK(answer_ids == text::tokenize(ep.goal.text, vocab));
  CHECK(s.elements.back().token == Vocabulary::kEos);
  // rollout states/actions interleave in the prompt
  int states = 0, actions = 0;
  for (size_t i = 0; i < begin; ++i) {
    states += s.elements[i].tag == Modality::State;
    actions += s.elements[i].tag == Modality::Action;
  }
  CHECK(states == ep.length() + 1);
  CHECK(actions == ep.length());
}

TEST_CASE("plain dataset drops the instruction wrapper") {
  const Vocabulary vocab = text::build_vocabulary();
  const auto episodes = sample_episodes(4);
  const auto plain = build_plain_dataset(episodes, vocab);
  CHECK(plain.size() == 4);
  const auto wrapped = make_generate_sample(episodes[0], vocab, 0, true);
  CHECK(plain[0].elements.size() < wrapped.elements.size());
  // prompt is exactly the goal tokens
  const size_t begin = plain[0].answer_begin();
  const auto prompt_ids = text_tokens(plain[0].elements, 0, begin);
  CHECK(prompt_ids == text::tokenize(episodes[0].goal.text, vocab));
  plain[0].check_invariants(Vocabulary::kEos, Vocabulary::kEndOfRollout);
}

TEST_CASE("format_prompt rejects missing fields") {
  const Vocabulary vocab = text::build_vocabulary();
  PromptFields empty;
  CHECK_THROWS_AS(format_prompt(Task::Dynamics, empty, vocab), std::invalid_argument);
  CHECK_THROWS_AS(format_prompt(Task::Explain, empty, vocab), std::invalid_argument);
  CHECK_THROWS_AS(format_prompt(Task::Generate, empty, vocab), std::invalid_argument);
  CHECK_THROWS_AS(format_prompt(Task::Consequence, empty, vocab), std::invalid_argument);
}

TEST_CASE("episodes without transitions are rejected") {
  const Vocabulary vocab = text::build_vocabulary();
  Episode ep;
  ep.goal = text::offline_goal(0, 0);
  ep.states.push_back(EnvState{});
  CHECK_THROWS_AS(build_instruction_dataset({ep}, vocab, 1), std::invalid_argument);
}

TEST_CASE("instruction samples round-trip through JSONL") {
  const Vocabulary vocab = text::build_vocabulary();
  const auto episodes = sample_episodes(5);
  const auto samples = build_instruction_dataset(episodes, vocab, 11);
  for (const auto& s : samples) {
    const std::string line = sample_to_json(s);
    const InstructionSample back = sample_from_json(line);
    CHECK(sample_to_json(back) == line);
    back.check_invariants(Vocabulary::kEos, Vocabulary::kEndOfRollout);
  }
}

TEST_CASE("schema violations are caught") {
  InstructionSample s;
  s.task = Task::Generate;
  s.elements.push_back(ModalElement::text(7));
  s.elements.push_back(ModalElement::state_of(EnvState{}, true));
  // too short: no (action, state) pair and no terminator
  CHECK_THROWS_AS(s.check_invariants(Vocabulary::kEos, Vocabulary::kEndOfRollout),
                  std::invalid_argument);
  s.elements.push_back(ModalElement::action_of(3, true));
  s.elements.push_back(ModalElement::state_of(EnvState{}, true));
  s.elements.push_back(ModalElement::text(Vocabulary::kEndOfRollout, true));
  s.check_invariants(Vocabulary::kEos, Vocabulary::kEndOfRollout);

  // answer must be a suffix
  s.elements[1].in_answer = false;
  CHECK_THROWS_AS(s.check_invariants(Vocabulary::kEos, Vocabulary::kEndOfRollout),
                  std::invalid_argument);
}
