#include "rollforge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "rollforge/prompts.hpp"

namespace rollforge::text {

using env::GoalDirection;
using env::GoalKind;
using env::GoalLevel;
using env::GoalSpec;
using env::RelativeGoal;

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Rephrase: return "rephrase";
    case Split::UnseenEasy: return "unseen_easy";
    case Split::UnseenHard: return "unseen_hard";
  }
  throw std::invalid_argument("bad split");
}

std::string direction_phrase(GoalDirection d) {
  switch (d) {
    case GoalDirection::Left: return "to the left of";
    case GoalDirection::Right: return "to the right of";
    case GoalDirection::Front: return "in front of";
    case GoalDirection::Behind: return "behind";
  }
  throw std::invalid_argument("bad direction");
}

std::vector<std::string> direction_keywords(GoalDirection d) {
  switch (d) {
    case GoalDirection::Left: return {"left", "leftward", "leftwards"};
    case GoalDirection::Right: return {"right", "rightward", "rightwards", "starboard"};
    case GoalDirection::Front:
      return {"front", "forward", "forwards", "ahead", "onward", "advance"};
    case GoalDirection::Behind:
      return {"behind", "backward", "backwards", "back", "rear", "rearward", "reverse"};
  }
  throw std::invalid_argument("bad direction");
}

const std::vector<GoalSpec>& enumerate_configurations() {
  static const std::vector<GoalSpec> configs = [] {
    std::vector<GoalSpec> out;
    out.reserve(80);
    for (int target = 0; target < env::kNumBalls; ++target) {
      for (int reference = 0; reference < env::kNumBalls; ++reference) {
        if (reference == target) continue;
        for (int d = 0; d < 4; ++d) {
          out.push_back(env::make_relative_goal(target, reference,
                                                static_cast<GoalDirection>(d)));
        }
      }
    }
    return out;
  }();
  return configs;
}

namespace {

bool contains(const std::string& s, const std::string& what) {
  return s.find(what) != std::string::npos;
}

void replace_all(std::string* s, const std::string& from, const std::string& to) {
  size_t pos = 0;
  while ((pos = s->find(from, pos)) != std::string::npos) {
    s->replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string substitute(const SentencePattern& p, const std::string& a, const std::string& b,
                       const GoalSpec& g) {
  std::string out = p.tmpl;
  replace_all(&out, "{A}", a);
  replace_all(&out, "{B}", b);
  if (contains(p.tmpl, "{DIR}")) replace_all(&out, "{DIR}", direction_phrase(g.direction));
  if (contains(p.tmpl, "{OPPDIR}"))
    replace_all(&out, "{OPPDIR}", direction_phrase(env::opposite(g.direction)));
  return out;
}

}  // namespace

std::string render_goal(const GoalSpec& g, const SentencePattern& p) {
  g.validate();
  const bool has_a = contains(p.tmpl, "{A}");
  const bool has_b = contains(p.tmpl, "{B}");
  const bool has_dir = contains(p.tmpl, "{DIR}") || contains(p.tmpl, "{OPPDIR}");
  switch (g.kind) {
    case GoalKind::RelativePosition: {
      if (!has_a || !has_b)
        throw std::invalid_argument("pattern arity mismatch for relative goal");
      if (p.bound_direction && *p.bound_direction != g.direction)
        throw std::invalid_argument("pattern direction does not match goal");
      return substitute(p, env::kBallColors[g.target], env::kBallColors[g.reference], g);
    }
    case GoalKind::AbsoluteMove: {
      if (!has_a || has_b)
        throw std::invalid_argument("pattern arity mismatch for absolute goal");
      if (!p.bound_direction || *p.bound_direction != g.direction) {
        if (!has_dir || p.bound_direction)
          throw std::invalid_argument("pattern direction does not match goal");
      }
      return substitute(p, env::kBallColors[g.target], "", g);
    }
    case GoalKind::Gather: {
      if (!has_a || has_b || has_dir)
        throw std::invalid_argument("pattern arity mismatch for gather goal");
      return substitute(p, env::kBallColors[g.center], "", g);
    }
    case GoalKind::LineArrangement: {
      if (has_a || has_b || has_dir)
        throw std::invalid_argument("pattern arity mismatch for line goal");
      if (g.order != std::array<int, 5>{0, 1, 2, 3, 4})
        throw std::invalid_argument("line patterns fix the canonical color order");
      return p.tmpl;
    }
    default:
      throw std::invalid_argument("compose goals are rendered by render_compose_text");
  }
}

std::string render_compose_text(const GoalSpec& g) {
  if (g.kind != GoalKind::Compose2 && g.kind != GoalKind::Compose3)
    throw std::invalid_argument("not a compose goal");
  const auto& clauses = hard_clause_patterns();
  std::string out;
  for (size_t i = 0; i < g.subgoals.size(); ++i) {
    const auto& sub = g.subgoals[i];
    GoalSpec tmp = env::make_relative_goal(sub.target, sub.reference, sub.direction,
                                           GoalLevel::UnseenHard);
    std::string clause = render_goal(tmp, clauses[i % 3]);
    if (!clause.empty() && clause.back() == '.') clause.pop_back();
    if (i > 0) {
      clause[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(clause[0])));
      out += " and ";
    }
    out += clause;
  }
  out += ".";
  return out;
}

std::vector<std::pair<std::string, GoalSpec>> novel_goal_set(GoalLevel level,
                                                             const NovelSetOptions& opts) {
  std::vector<std::pair<std::string, GoalSpec>> out;
  switch (level) {
    case GoalLevel::Rephrasing: {
      for (const auto& cfg : enumerate_configurations()) {
        for (const auto& p : rephrase_patterns()) {
          GoalSpec g = cfg;
          g.level = GoalLevel::Rephrasing;
          g.text = render_goal(g, p);
          out.emplace_back(g.text, std::move(g));
        }
      }
      return out;
    }
    case GoalLevel::UnseenEasy: {
      for (int ball = 0; ball < env::kNumBalls; ++ball) {
        for (int d = 0; d < 4; ++d) {
          const auto dir = static_cast<GoalDirection>(d);
          for (const auto& p : unseen_easy_patterns()) {
            if (p.bound_direction != dir) continue;
            GoalSpec g = env::make_absolute_goal(ball, dir);
            g.text = render_goal(g, p);
            out.emplace_back(g.text, std::move(g));
          }
        }
      }
      return out;
    }
    case GoalLevel::UnseenHard: {
      const auto& configs = enumerate_configurations();
      auto rel = [&](size_t i) {
        return RelativeGoal{configs[i].target, configs[i].reference, configs[i].direction};
      };
      auto add_compose = [&](const std::vector<RelativeGoal>& subs) {
        GoalSpec g = env::make_compose_goal(subs);
        g.text = render_compose_text(g);
        out.emplace_back(g.text, std::move(g));
      };
      std::vector<std::vector<RelativeGoal>> pairs;
      for (size_t i = 0; i < configs.size(); ++i) {
        for (size_t j = i + 1; j < configs.size(); ++j) {
          std::vector<RelativeGoal> subs = {rel(i), rel(j)};
          if (env::compatible_subgoals(subs)) pairs.push_back(std::move(subs));
        }
      }
      size_t stride2 = opts.max_compose2 > 0 && pairs.size() > opts.max_compose2
                           ? (pairs.size() + opts.max_compose2 - 1) / opts.max_compose2
                           : 1;
      for (size_t i = 0; i < pairs.size(); i += stride2) add_compose(pairs[i]);

      std::vector<std::vector<RelativeGoal>> triples;
      for (size_t i = 0; i < configs.size(); ++i) {
        for (size_t j = i + 1; j < configs.size(); ++j) {
          if (!env::compatible_subgoals({rel(i), rel(j)})) continue;
          for (size_t k = j + 1; k < configs.size(); ++k) {
            std::vector<RelativeGoal> subs = {rel(i), rel(j), rel(k)};
            if (env::compatible_subgoals(subs)) triples.push_back(std::move(subs));
          }
        }
      }
      size_t stride3 = opts.max_compose3 > 0 && triples.size() > opts.max_compose3
                           ? (triples.size() + opts.max_compose3 - 1) / opts.max_compose3
                           : 1;
      for (size_t i = 0; i < triples.size(); i += stride3) add_compose(triples[i]);

      for (const auto& p : hard_line_patterns()) {
        GoalSpec g = env::make_line_goal({0, 1, 2, 3, 4});
        g.text = render_goal(g, p);
        out.emplace_back(g.text, std::move(g));
      }
      for (const auto& p : hard_gather_patterns()) {
        GoalSpec g = env::make_gather_goal(2);  // green
        g.text = render_goal(g, p);
        out.emplace_back(g.text, std::move(g));
      }
      return out;
    }
    default:
      throw std::invalid_argument("novel_goal_set: unknown level");
  }
}

GoalSpec offline_goal(size_t config_index, size_t pattern_index) {
  const auto& configs = enumerate_configurations();
  const auto& pats = train_patterns();
  GoalSpec g = configs.at(config_index);
  g.text = render_goal(g, pats.at(pattern_index));
  return g;
}

GoalSpec sample_offline_goal(Rng& rng) {
  const size_t ci = rng.uniform_index(enumerate_configurations().size());
  const size_t pi = rng.uniform_index(train_patterns().size());
  return offline_goal(ci, pi);
}

Vocabulary build_vocabulary() {
  std::set<std::string> words;
  auto add_text = [&](const std::string& s) {
    std::string cleaned = s;
    replace_all(&cleaned, "{A}", " ");
    replace_all(&cleaned, "{B}", " ");
    replace_all(&cleaned, "{DIR}", " ");
    replace_all(&cleaned, "{OPPDIR}", " ");
    for (const auto& w : normalize_words(cleaned)) words.insert(w);
  };
  for (const auto* set : {&train_patterns(), &rephrase_patterns(), &unseen_easy_patterns(),
                          &hard_clause_patterns(), &hard_line_patterns(),
                          &hard_gather_patterns()}) {
    for (const auto& p : *set) add_text(p.tmpl);
  }
  for (const auto& f : prompt_fragments()) add_text(f);
  for (const auto* c : env::kBallColors) words.insert(c);
  for (int d = 0; d < 4; ++d) {
    add_text(direction_phrase(static_cast<GoalDirection>(d)));
    for (const auto& w : direction_keywords(static_cast<GoalDirection>(d))) words.insert(w);
  }
  words.insert("and");
  return Vocabulary(std::vector<std::string>(words.begin(), words.end()));
}

// --- Corpus files ---

namespace {

void write_split(const std::string& path, const std::vector<SentencePattern>& pats,
                 Split split) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "# split: " << split_name(split) << "\n";
  for (const auto& p : pats) {
    if (p.bound_direction) out << env::direction_word(*p.bound_direction) << "\t";
    out << p.tmpl << "\n";
  }
}

}  // namespace

void write_corpus_files(const std::string& dir) {
  write_split(dir + "/train.txt", train_patterns(), Split::Train);
  write_split(dir + "/rephrase.txt", rephrase_patterns(), Split::Rephrase);
  write_split(dir + "/unseen_easy.txt", unseen_easy_patterns(), Split::UnseenEasy);
  write_split(dir + "/hard_clause.txt", hard_clause_patterns(), Split::UnseenHard);
  write_split(dir + "/hard_line.txt", hard_line_patterns(), Split::UnseenHard);
  write_split(dir + "/hard_gather.txt", hard_gather_patterns(), Split::UnseenHard);
}

std::vector<SentencePattern> parse_corpus_file(const std::string& path, Split* split_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open corpus file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# split: ", 0) != 0)
    throw std::invalid_argument("corpus file missing '# split:' header: " + path);
  const std::string name = line.substr(9);
  Split split = Split::Train;
  bool found = false;
  for (int s = 0; s < 4; ++s) {
    if (name == split_name(static_cast<Split>(s))) {
      split = static_cast<Split>(s);
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("unknown split name: " + name);
  if (split_out) *split_out = split;

  std::vector<SentencePattern> out;
  int id = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    SentencePattern p;
    p.id = id++;
    p.split = split;
    const size_t tab = line.find('\t');
    if (tab != std::string::npos) {
      const std::string dir = line.substr(0, tab);
      for (int d = 0; d < 4; ++d) {
        if (dir == env::direction_word(static_cast<GoalDirection>(d)))
          p.bound_direction = static_cast<GoalDirection>(d);
      }
      if (!p.bound_direction)
        throw std::invalid_argument("bad direction prefix in corpus line: " + dir);
      p.tmpl = line.substr(tab + 1);
    } else {
      p.tmpl = line;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace rollforge::text
