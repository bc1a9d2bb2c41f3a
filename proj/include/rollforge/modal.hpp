#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rollforge/env.hpp"

namespace rollforge::lm {

enum class Modality : int { Text = 0, State = 1, Action = 2 };

// One slot of a multimodal sequence: a text token, a whole environment state
// or a whole action, plus the answer (loss) mask.
struct ModalElement {
  Modality tag = Modality::Text;
  int token = -1;       // Modality::Text
  env::EnvState state;  // Modality::State
  int action = -1;      // Modality::Action, index 0..39
  bool in_answer = false;

  static ModalElement text(int token_id, bool answer = false) {
    ModalElement e;
    e.tag = Modality::Text;
    e.token = token_id;
    e.in_answer = answer;
    return e;
  }
  static ModalElement state_of(const env::EnvState& s, bool answer = false) {
    ModalElement e;
    e.tag = Modality::State;
    e.state = s;
    e.in_answer = answer;
    return e;
  }
  static ModalElement action_of(int index, bool answer = false) {
    ModalElement e;
    e.tag = Modality::Action;
    e.action = index;
    e.in_answer = answer;
    return e;
  }
};

enum class Task : int { Dynamics = 0, Explain = 1, Generate = 2, Consequence = 3 };

const char* task_name(Task t);
Task task_from_name(const std::string& s);

struct InstructionSample {
  Task task = Task::Dynamics;
  std::vector<ModalElement> elements;
  int64_t episode_id = -1;

  // Answer elements form one non-empty contiguous suffix whose modality
  // schedule matches the task schema.
  void check_invariants(int eos_token, int eor_token) const;
  size_t answer_begin() const;  // index of the first in_answer element
};

std::string sample_to_json(const InstructionSample& s);
InstructionSample sample_from_json(const std::string& line);
void write_samples(const std::vector<InstructionSample>& samples, const std::string& path);
std::vector<InstructionSample> read_samples(const std::string& path);

}  // namespace rollforge::lm
