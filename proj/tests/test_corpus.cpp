#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "rollforge/corpus.hpp"
#include "rollforge/prompts.hpp"
#include "rollforge/tokenizer.hpp"

using namespace rollforge;
using namespace rollforge::env;
using namespace rollforge::text;

TEST_CASE("enumerate_configurations yields the 80 goal configurations") {
  const auto& configs = enumerate_configurations();
  CHECK(configs.size() == 80);
  for (const auto& g : configs) {
    CHECK(g.kind == GoalKind::RelativePosition);
    CHECK(g.target != g.reference);
  }
  // set equality with a brute-force triple loop
  std::set<std::tuple<int, int, int>> got, want;
  for (const auto& g : configs)
    got.insert({g.target, g.reference, static_cast<int>(g.direction)});
  for (int t = 0; t < 5; ++t)
    for (int r = 0; r < 5; ++r)
      for (int d = 0; d < 4; ++d)
        if (t != r) want.insert({t, r, d});
  CHECK(got == want);
}

TEST_CASE("pattern set sizes") {
  CHECK(train_patterns().size() == 18);
  CHECK(rephrase_patterns().size() == 40);
  CHECK(unseen_easy_patterns().size() == 80);
  CHECK(hard_clause_patterns().size() == 6);
  CHECK(hard_line_patterns().size() == 20);
  CHECK(hard_gather_patterns().size() == 20);
}

TEST_CASE("render_goal substitutes colors and direction phrases") {
  const GoalSpec g = make_relative_goal(0, 1, GoalDirection::Left);
  SentencePattern p{0, Split::Rephrase,
                    "Slide the {A} ball to the left of the {B} ball with a gentle touch.",
                    std::nullopt};
  CHECK(render_goal(g, p) ==
        "Slide the red ball to the left of the blue ball with a gentle touch.");
  CHECK(render_goal(g, p) == render_goal(g, p));

  // the shipped pattern with {DIR} recovers the same sentence for left goals
  const auto& rp = rephrase_patterns();
  bool found = false;
  for (const auto& pat : rp) {
    GoalSpec g2 = g;
    g2.level = GoalLevel::Rephrasing;
    if (render_goal(g2, pat) ==
        "Slide the red ball to the left of the blue ball with a gentle touch.")
      found = true;
  }
  CHECK(found);

  // arity mismatch
  const GoalSpec abs = make_absolute_goal(0, GoalDirection::Behind);
  CHECK_THROWS_AS(render_goal(abs, p), std::invalid_argument);
}

TEST_CASE("rephrasing set is 80 x 40 and well-formed") {
  const auto set = novel_goal_set(GoalLevel::Rephrasing);
  CHECK(set.size() == 80 * 40);
  for (const auto& [text, g] : set) {
    g.validate();
    CHECK(g.level == GoalLevel::Rephrasing);
    CHECK(text == g.text);
    CHECK_FALSE(text.empty());
  }
  // the paper-style gentle-left string appears
  bool found = false;
  for (const auto& [text, g] : set)
    if (text == "Move the red ball gently to the left of the blue ball.") found = true;
  CHECK(found);
}

TEST_CASE("unseen_easy set covers 5 balls x 4 directions x 20 patterns") {
  const auto set = novel_goal_set(GoalLevel::UnseenEasy);
  CHECK(set.size() == 5 * 4 * 20);
  bool found = false;
  for (const auto& [text, g] : set) {
    g.validate();
    CHECK(g.kind == GoalKind::AbsoluteMove);
    if (text == "Kindly relocate the red sphere towards the left.") {
      found = true;
      CHECK(g.target == 0);
      CHECK(g.direction == GoalDirection::Left);
    }
  }
  CHECK(found);
}

TEST_CASE("unseen_hard set composes goals and ships line/gather templates") {
  NovelSetOptions opts;
  opts.max_compose3 = 0;  // full enumeration to check the composed examples
  const auto set = novel_goal_set(GoalLevel::UnseenHard, opts);
  size_t n2 = 0, n3 = 0, nline = 0, ngather = 0;
  bool gather_hub = false, compose2_example = false, compose3_example = false;
  for (const auto& [text, g] : set) {
    g.validate();
    switch (g.kind) {
      case GoalKind::Compose2: ++n2; break;
      case GoalKind::Compose3: ++n3; break;
      case GoalKind::LineArrangement: ++nline; break;
      case GoalKind::Gather: ++ngather; break;
      default: FAIL("unexpected kind");
    }
    if (text == "Arrange all other balls around the green one, treating it as the hub of "
                "the circle.")
      gather_hub = true;
    if (text == "Push the red ball behind the blue ball and move the green ball behind the "
                "purple ball.")
      compose2_example = true;
    if (text == "Push the red ball behind the blue ball and move the green ball to the left "
                "of the purple ball and keep the cyan ball in front of the red ball.")
      compose3_example = true;
  }
  // all non-conflicting pairs: C(80,2) minus 160 opposite-direction clashes
  CHECK(n2 == 3000);
  CHECK(n3 > 3000);  // full triple enumeration
  CHECK(nline == 20);
  CHECK(ngather == 20);
  CHECK(gather_hub);
  CHECK(compose2_example);
  CHECK(compose3_example);
}

TEST_CASE("novel_goal_set rejects the offline level") {
  CHECK_THROWS_AS(novel_goal_set(GoalLevel::Offline), std::invalid_argument);
}

TEST_CASE("train and rephrase template sets are disjoint strings") {
  std::set<std::string> train_set;
  for (const auto& p : train_patterns()) train_set.insert(p.tmpl);
  for (const auto& p : rephrase_patterns()) CHECK(train_set.count(p.tmpl) == 0);
}

TEST_CASE("tokenizer round-trips normalized sentences") {
  const Vocabulary v = build_vocabulary();
  const auto ids = tokenize("Move the red ball forward.", v);
  CHECK(detokenize(ids, v) == "move the red ball forward .");
  CHECK(tokenize("", v).empty());
  // normalization splits punctuation and lowercases
  const auto words = normalize_words("I'd like the red-colored ball, please?");
  const std::vector<std::string> want = {"i", "'", "d",    "like",   "the", "red", "-",
                                         "colored", "ball", ",", "please", "?"};
  CHECK(words == want);
}

TEST_CASE("vocabulary is closed over every shipped corpus sentence and prompt") {
  const Vocabulary v = build_vocabulary();
  auto check_no_unk = [&](const std::string& s) {
    for (int id : tokenize(s, v)) CHECK(id != Vocabulary::kUnk);
  };
  for (const auto& [text, g] : novel_goal_set(GoalLevel::Rephrasing)) check_no_unk(text);
  for (const auto& [text, g] : novel_goal_set(GoalLevel::UnseenEasy)) check_no_unk(text);
  NovelSetOptions opts;
  opts.max_compose2 = 300;
  opts.max_compose3 = 300;
  for (const auto& [text, g] : novel_goal_set(GoalLevel::UnseenHard, opts)) check_no_unk(text);
  for (size_t c = 0; c < 80; ++c)
    for (size_t p = 0; p < 18; ++p) check_no_unk(offline_goal(c, p).text);
  for (const auto& f : prompt_fragments()) check_no_unk(f);
}

TEST_CASE("vocabulary is stable and round-trips through its file format") {
  const Vocabulary a = build_vocabulary();
  const Vocabulary b = build_vocabulary();
  CHECK(a.tokens() == b.tokens());
  CHECK(a.hash() == b.hash());
  CHECK(a.id("<pad>") == 0);
  CHECK(a.token(Vocabulary::kEndOfRollout) == "<eor>");

  const auto path = std::filesystem::temp_directory_path() / "rollforge_vocab_test.txt";
  a.save(path.string());
  const Vocabulary c = Vocabulary::load(path.string());
  CHECK(c.tokens() == a.tokens());
  std::filesystem::remove(path);
}

TEST_CASE("offline goal sampling renders a training pattern") {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const GoalSpec g = sample_offline_goal(rng);
    CHECK(g.kind == GoalKind::RelativePosition);
    CHECK_FALSE(g.text.empty());
    CHECK(g.level == GoalLevel::Offline);
  }
}

TEST_CASE("corpus files round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "rollforge_corpus_test";
  std::filesystem::create_directories(dir);
  write_corpus_files(dir.string());
  Split split;
  const auto easy = parse_corpus_file((dir / "unseen_easy.txt").string(), &split);
  CHECK(split == Split::UnseenEasy);
  REQUIRE(easy.size() == unseen_easy_patterns().size());
  for (size_t i = 0; i < easy.size(); ++i) {
    CHECK(easy[i].tmpl == unseen_easy_patterns()[i].tmpl);
    CHECK(easy[i].bound_direction == unseen_easy_patterns()[i].bound_direction);
  }
  const auto train = parse_corpus_file((dir / "train.txt").string(), &split);
  CHECK(split == Split::Train);
  CHECK(train.size() == 18);
  std::filesystem::remove_all(dir);
}

#ifdef ROLLFORGE_SOURCE_DIR
TEST_CASE("shipped corpus files in data/ match the built-in patterns") {
  const std::string root = ROLLFORGE_SOURCE_DIR;
  Split split;
  struct Row {
    const char* file;
    const std::vector<SentencePattern>* pats;
  };
  const Row rows[] = {
      {"/data/corpora/train.txt", &train_patterns()},
      {"/data/corpora/rephrase.txt", &rephrase_patterns()},
      {"/data/corpora/unseen_easy.txt", &unseen_easy_patterns()},
      {"/data/corpora/hard_clause.txt", &hard_clause_patterns()},
      {"/data/corpora/hard_line.txt", &hard_line_patterns()},
      {"/data/corpora/hard_gather.txt", &hard_gather_patterns()},
  };
  for (const auto& row : rows) {
    const auto got = parse_corpus_file(root + row.file, &split);
    REQUIRE(got.size() == row.pats->size());
    for (size_t i = 0; i < got.size(); ++i) CHECK(got[i].tmpl == (*row.pats)[i].tmpl);
  }
}
#endif
