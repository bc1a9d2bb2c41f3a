#include "rollforge/modal.hpp"

#include <fstream>
#include <json.hpp>

namespace rollforge::lm {

using nlohmann::json;

const char* task_name(Task t) {
  switch (t) {
    case Task::Dynamics: return "dynamics";
    case Task::Explain: return "explain";
    case Task::Generate: return "generate";
    case Task::Consequence: return "consequence";
  }
  throw std::invalid_argument("bad task");
}

Task task_from_name(const std::string& s) {
  for (int i = 0; i < 4; ++i)
    if (s == task_name(static_cast<Task>(i))) return static_cast<Task>(i);
  throw std::invalid_argument("unknown task: " + s);
}

size_t InstructionSample::answer_begin() const {
  for (size_t i = 0; i < elements.size(); ++i)
    if (elements[i].in_answer) return i;
  return elements.size();
}

void InstructionSample::check_invariants(int eos_token, int eor_token) const {
  const size_t begin = answer_begin();
  if (begin == elements.size())
    throw std::invalid_argument("sample has no answer elements");
  if (begin == 0) throw std::invalid_argument("sample has no prompt elements");
  for (size_t i = begin; i < elements.size(); ++i)
    if (!elements[i].in_answer)
      throw std::invalid_argument("answer elements must form a contiguous suffix");

  const size_t n = elements.size() - begin;
  auto tag_at = [&](size_t k) { return elements[begin + k].tag; };
  switch (task) {
    case Task::Dynamics:
    case Task::Consequence:
      if (n != 1 || tag_at(0) != Modality::State)
        throw std::invalid_argument("answer schema: expected a single state");
      break;
    case Task::Explain:
      for (size_t k = 0; k < n; ++k)
        if (tag_at(k) != Modality::Text)
          throw std::invalid_argument("answer schema: explain answers are text");
      if (elements.back().token != eos_token)
        throw std::invalid_argument("answer schema: explain must end with <eos>");
      break;
    case Task::Generate: {
      // STATE (ACTION STATE)+ <eor>
      if (n < 4) throw std::invalid_argument("answer schema: generate answer too short");
      if (tag_at(0) != Modality::State)
        throw std::invalid_argument("answer schema: generate starts with a state");
      const size_t body = n - 1;
      if (body % 2 != 1)
        throw std::invalid_argument("answer schema: generate needs s (a s)* pairs");
      for (size_t k = 1; k < body; k += 2) {
        if (tag_at(k) != Modality::Action || tag_at(k + 1) != Modality::State)
          throw std::invalid_argument("answer schema: generate alternates action/state");
      }
      const auto& last = elements.back();
      if (last.tag != Modality::Text || last.token != eor_token)
        throw std::invalid_argument("answer schema: generate must end with <eor>");
      break;
    }
  }
}

namespace {

json element_json(const ModalElement& e) {
  switch (e.tag) {
    case Modality::Text: return json::array({"T", e.token, e.in_answer ? 1 : 0});
    case Modality::State: return json::array({"S", e.state.p, e.in_answer ? 1 : 0});
    case Modality::Action: return json::array({"A", e.action, e.in_answer ? 1 : 0});
  }
  throw std::invalid_argument("bad modality");
}

ModalElement element_from(const json& j) {
  const std::string tag = j.at(0).get<std::string>();
  const bool answer = j.at(2).get<int>() != 0;
  if (tag == "T") return ModalElement::text(j.at(1).get<int>(), answer);
  if (tag == "A") return ModalElement::action_of(j.at(1).get<int>(), answer);
  if (tag == "S") {
    env::EnvState s;
    const auto v = j.at(1).get<std::vector<float>>();
    if (v.size() != env::kStateDim) throw std::invalid_argument("bad state length");
    std::copy(v.begin(), v.end(), s.p.begin());
    return ModalElement::state_of(s, answer);
  }
  throw std::invalid_argument("bad element tag: " + tag);
}

}  // namespace

std::string sample_to_json(const InstructionSample& s) {
  json j;
  j["task"] = task_name(s.task);
  j["episode"] = s.episode_id;
  json elems = json::array();
  for (const auto& e : s.elements) elems.push_back(element_json(e));
  j["elems"] = std::move(elems);
  return j.dump();
}

InstructionSample sample_from_json(const std::string& line) {
  const json j = json::parse(line);
  InstructionSample s;
  s.task = task_from_name(j.at("task").get<std::string>());
  s.episode_id = j.at("episode").get<int64_t>();
  for (const auto& e : j.at("elems")) s.elements.push_back(element_from(e));
  return s;
}

void write_samples(const std::vector<InstructionSample>& samples, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& s : samples) out << sample_to_json(s) << "\n";
}

std::vector<InstructionSample> read_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open instruction file: " + path);
  std::vector<InstructionSample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(sample_from_json(line));
  }
  return out;
}

}  // namespace rollforge::lm
