#include "rollforge/instructions.hpp"

#include "rollforge/prompts.hpp"

namespace rollforge::lm {

using text::Vocabulary;

namespace {

void append_text(std::vector<ModalElement>* out, const std::string& s,
                 const Vocabulary& vocab, bool answer = false) {
  for (int id : text::tokenize(s, vocab)) out->push_back(ModalElement::text(id, answer));
}

void append_rollout(std::vector<ModalElement>* out, const env::Episode& ep,
                    bool answer = false) {
  out->push_back(ModalElement::state_of(ep.states[0], answer));
  for (int t = 0; t < ep.length(); ++t) {
    out->push_back(ModalElement::action_of(ep.actions[t], answer));
    out->push_back(ModalElement::state_of(ep.states[t + 1], answer));
  }
}

}  // namespace

std::vector<ModalElement> format_prompt(Task task, const PromptFields& fields,
                                        const Vocabulary& vocab) {
  std::vector<ModalElement> out;
  switch (task) {
    case Task::Dynamics: {
      if (!fields.state || fields.action < 0)
        throw std::invalid_argument("dynamics prompt needs state and action");
      append_text(&out, text::kDynamicsPrefix, vocab);
      out.push_back(ModalElement::state_of(*fields.state));
      append_text(&out, text::kDynamicsMid, vocab);
      out.push_back(ModalElement::action_of(fields.action));
      append_text(&out, text::kDynamicsSuffix, vocab);
      return out;
    }
    case Task::Explain: {
      if (!fields.rollout) throw std::invalid_argument("explain prompt needs a rollout");
      append_text(&out, text::kExplainPrefix, vocab);
      append_rollout(&out, *fields.rollout);
      append_text(&out, text::kExplainSuffix, vocab);
      return out;
    }
    case Task::Generate: {
      if (!fields.goal_text) throw std::invalid_argument("generate prompt needs a goal");
      append_text(&out, text::kGeneratePrefix, vocab);
      append_text(&out, *fields.goal_text, vocab);
      append_text(&out, text::kGenerateSuffix, vocab);
      return out;
    }
    case Task::Consequence: {
      if (!fields.state || !fields.goal_text)
        throw std::invalid_argument("consequence prompt needs a state and a goal");
      append_text(&out, text::kConsequencePrefix, vocab);
      out.push_back(ModalElement::state_of(*fields.state));
      append_text(&out, text::kConsequenceMid, vocab);
      append_text(&out, *fields.goal_text, vocab);
      append_text(&out, text::kConsequenceSuffix, vocab);
      return out;
    }
  }
  throw std::invalid_argument("bad task");
}

std::vector<ModalElement> format_plain_prompt(const std::string& goal_text,
                                              const Vocabulary& vocab) {
  std::vector<ModalElement> out;
  append_text(&out, goal_text, vocab);
  if (out.empty()) throw std::invalid_argument("empty goal text");
  return out;
}

InstructionSample make_dynamics_sample(const env::EnvState& s, int action,
                                       const env::EnvState& s_next, const Vocabulary& vocab,
                                       int64_t episode_id) {
  InstructionSample sample;
  sample.task = Task::Dynamics;
  sample.episode_id = episode_id;
  PromptFields f;
  f.state = &s;
  f.action = action;
  sample.elements = format_prompt(Task::Dynamics, f, vocab);
  sample.elements.push_back(ModalElement::state_of(s_next, /*answer=*/true));
  return sample;
}

InstructionSample make_explain_sample(const env::Episode& ep, const Vocabulary& vocab,
                                      int64_t episode_id) {
  InstructionSample sample;
  sample.task = Task::Explain;
  sample.episode_id = episode_id;
  PromptFields f;
  f.rollout = &ep;
  sample.elements = format_prompt(Task::Explain, f, vocab);
  append_text(&sample.elements, ep.goal.text, vocab, /*answer=*/true);
  sample.elements.push_back(ModalElement::text(Vocabulary::kEos, /*answer=*/true));
  return sample;
}

InstructionSample make_generate_sample(const env::Episode& ep, const Vocabulary& vocab,
                                       int64_t episode_id, bool with_instruction) {
  InstructionSample sample;
  sample.task = Task::Generate;
  sample.episode_id = episode_id;
  if (with_instruction) {
    PromptFields f;
    f.goal_text = &ep.goal.text;
    sample.elements = format_prompt(Task::Generate, f, vocab);
  } else {
    sample.elements = format_plain_prompt(ep.goal.text, vocab);
  }
  append_rollout(&sample.elements, ep, /*answer=*/true);
  sample.elements.push_back(ModalElement::text(Vocabulary::kEndOfRollout, /*answer=*/true));
  return sample;
}

InstructionSample make_consequence_sample(const env::Episode& ep, const Vocabulary& vocab,
                                          int64_t episode_id) {
  InstructionSample sample;
  sample.task = Task::Consequence;
  sample.episode_id = episode_id;
  PromptFields f;
  f.state = &ep.states.front();
  f.goal_text = &ep.goal.text;
  sample.elements = format_prompt(Task::Consequence, f, vocab);
  sample.elements.push_back(ModalElement::state_of(ep.states.back(), /*answer=*/true));
  return sample;
}

std::vector<InstructionSample> build_instruction_dataset(
    const std::vector<env::Episode>& episodes, const Vocabulary& vocab, uint64_t seed) {
  std::vector<InstructionSample> out;
  out.reserve(episodes.size() * 4);
  for (size_t i = 0; i < episodes.size(); ++i) {
    const auto& ep = episodes[i];
    if (ep.length() < 1) throw std::invalid_argument("episode with no transition");
    Rng rng(derive_seed(seed, static_cast<uint64_t>(i)));
    const int t = rng.uniform_int(0, ep.length() - 1);
    const auto id = static_cast<int64_t>(i);
    out.push_back(make_dynamics_sample(ep.states[t], ep.actions[t], ep.states[t + 1], vocab, id));
    out.push_back(make_explain_sample(ep, vocab, id));
    out.push_back(make_generate_sample(ep, vocab, id));
    out.push_back(make_consequence_sample(ep, vocab, id));
  }
  return out;
}

std::vector<InstructionSample> build_plain_dataset(const std::vector<env::Episode>& episodes,
                                                   const Vocabulary& vocab) {
  std::vector<InstructionSample> out;
  out.reserve(episodes.size());
  for (size_t i = 0; i < episodes.size(); ++i) {
    if (episodes[i].length() < 1) throw std::invalid_argument("episode with no transition");
    out.push_back(make_generate_sample(episodes[i], vocab, static_cast<int64_t>(i),
                                       /*with_instruction=*/false));
  }
  return out;
}

}  // namespace rollforge::lm
