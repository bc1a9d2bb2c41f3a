#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rollforge/env.hpp"
#include "rollforge/tokenizer.hpp"

namespace rollforge::text {

enum class Split : int { Train = 0, Rephrase = 1, UnseenEasy = 2, UnseenHard = 3 };

const char* split_name(Split s);

// A template with {A} (target/center color), {B} (reference color), {DIR}
// (direction phrase of the goal) and {OPPDIR} (phrase of the opposite
// direction) placeholders. Patterns whose wording fixes the direction carry
// bound_direction instead of a {DIR} placeholder.
struct SentencePattern {
  int id = 0;
  Split split = Split::Train;
  std::string tmpl;
  std::optional<env::GoalDirection> bound_direction;
};

// Shipped pattern sets.
const std::vector<SentencePattern>& train_patterns();        // 18, authored
const std::vector<SentencePattern>& rephrase_patterns();     // 40
const std::vector<SentencePattern>& unseen_easy_patterns();  // 80, direction-bound
const std::vector<SentencePattern>& hard_clause_patterns();  // 6, compose clauses
const std::vector<SentencePattern>& hard_line_patterns();    // 20
const std::vector<SentencePattern>& hard_gather_patterns();  // 20

// Relative phrase of a goal direction ("to the left of", "in front of", ...).
std::string direction_phrase(env::GoalDirection d);
// Plain direction word used in judgments ("left", "forward", ...).
std::vector<std::string> direction_keywords(env::GoalDirection d);

// The 80 offline goal configurations: 5 targets x 4 references x 4 directions.
const std::vector<env::GoalSpec>& enumerate_configurations();

// Placeholder substitution; throws std::invalid_argument on arity mismatch
// or a bound direction that does not match the goal.
std::string render_goal(const env::GoalSpec& g, const SentencePattern& p);

// Deterministic composite sentence for compose2/compose3 goals, built from
// the clause patterns ("Push ... and move ... and keep ...").
std::string render_compose_text(const env::GoalSpec& g);

struct NovelSetOptions {
  size_t max_compose2 = 0;     // 0 = keep all non-conflicting pairs
  size_t max_compose3 = 3000;  // stride-sampled from the full enumeration
};

// Evaluation goal sets per task level; throws on the offline level.
std::vector<std::pair<std::string, env::GoalSpec>> novel_goal_set(
    env::GoalLevel level, const NovelSetOptions& opts = {});

// Offline goal: configuration x training sentence pattern.
env::GoalSpec offline_goal(size_t config_index, size_t pattern_index);
env::GoalSpec sample_offline_goal(Rng& rng);

// Word-level vocabulary closed over every shipped template, color word,
// direction phrase and prompt fragment.
Vocabulary build_vocabulary();

// Plain-text corpus files: '# split: <name>' header, one template per line;
// direction-bound splits prefix each line with '<direction>\t'.
void write_corpus_files(const std::string& dir);
std::vector<SentencePattern> parse_corpus_file(const std::string& path, Split* split_out);

}  // namespace rollforge::text
