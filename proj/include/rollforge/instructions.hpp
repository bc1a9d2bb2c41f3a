#pragma once

#include "rollforge/modal.hpp"
#include "rollforge/tokenizer.hpp"

namespace rollforge::lm {

// Slot values for a task prompt; unused fields stay null/negative.
struct PromptFields {
  const env::EnvState* state = nullptr;    // dynamics s_t, consequence s_0
  int action = -1;                         // dynamics a_t
  const env::Episode* rollout = nullptr;   // explain
  const std::string* goal_text = nullptr;  // generate, consequence
};

// Instruction prompt with state/action/goal slots spliced in; answer elements
// are appended by the sample builders below. Throws on missing fields.
std::vector<ModalElement> format_prompt(Task task, const PromptFields& fields,
                                        const text::Vocabulary& vocab);

// Bare prompt for the no-instruction fine-tuning arm: just the goal tokens.
std::vector<ModalElement> format_plain_prompt(const std::string& goal_text,
                                              const text::Vocabulary& vocab);

InstructionSample make_dynamics_sample(const env::EnvState& s, int action,
                                       const env::EnvState& s_next,
                                       const text::Vocabulary& vocab, int64_t episode_id);
InstructionSample make_explain_sample(const env::Episode& ep, const text::Vocabulary& vocab,
                                      int64_t episode_id);
InstructionSample make_generate_sample(const env::Episode& ep, const text::Vocabulary& vocab,
                                       int64_t episode_id, bool with_instruction = true);
InstructionSample make_consequence_sample(const env::Episode& ep,
                                          const text::Vocabulary& vocab, int64_t episode_id);

// Four samples per episode (the dynamics task uses one uniformly sampled
// transition); deterministic in seed. Episodes with T = 0 are rejected.
std::vector<InstructionSample> build_instruction_dataset(
    const std::vector<env::Episode>& episodes, const text::Vocabulary& vocab, uint64_t seed);

// One bare goal+rollout sample per episode (ablation arm).
std::vector<InstructionSample> build_plain_dataset(const std::vector<env::Episode>& episodes,
                                                   const text::Vocabulary& vocab);

}  // namespace rollforge::lm
