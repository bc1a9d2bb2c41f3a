#include "rollforge/episode_io.hpp"

#include <fstream>
#include <json.hpp>

namespace rollforge::env {

using nlohmann::json;

namespace {

json goal_json(const GoalSpec& g) {
  json j;
  j["level"] = level_name(g.level);
  j["kind"] = kind_name(g.kind);
  switch (g.kind) {
    case GoalKind::RelativePosition:
      j["target"] = g.target;
      j["reference"] = g.reference;
      j["direction"] = direction_word(g.direction);
      break;
    case GoalKind::AbsoluteMove:
      j["target"] = g.target;
      j["direction"] = direction_word(g.direction);
      break;
    case GoalKind::Compose2:
    case GoalKind::Compose3: {
      json subs = json::array();
      for (const auto& s : g.subgoals) {
        subs.push_back({{"target", s.target},
                        {"reference", s.reference},
                        {"direction", direction_word(s.direction)}});
      }
      j["subgoals"] = std::move(subs);
      break;
    }
    case GoalKind::LineArrangement:
      j["order"] = g.order;
      break;
    case GoalKind::Gather:
      j["center"] = g.center;
      break;
  }
  return j;
}

GoalDirection direction_from_word(const std::string& w) {
  for (int i = 0; i < 4; ++i) {
    auto d = static_cast<GoalDirection>(i);
    if (w == direction_word(d)) return d;
  }
  throw std::invalid_argument("unknown direction word: " + w);
}

GoalSpec goal_from(const json& j) {
  GoalSpec g;
  g.level = level_from_name(j.at("level").get<std::string>());
  g.kind = kind_from_name(j.at("kind").get<std::string>());
  switch (g.kind) {
    case GoalKind::RelativePosition:
      g.target = j.at("target").get<int>();
      g.reference = j.at("reference").get<int>();
      g.direction = direction_from_word(j.at("direction").get<std::string>());
      break;
    case GoalKind::AbsoluteMove:
      g.target = j.at("target").get<int>();
      g.direction = direction_from_word(j.at("direction").get<std::string>());
      break;
    case GoalKind::Compose2:
    case GoalKind::Compose3:
      for (const auto& s : j.at("subgoals")) {
        g.subgoals.push_back({s.at("target").get<int>(), s.at("reference").get<int>(),
                              direction_from_word(s.at("direction").get<std::string>())});
      }
      break;
    case GoalKind::LineArrangement: {
      auto v = j.at("order").get<std::vector<int>>();
      if (v.size() != kNumBalls) throw std::invalid_argument("bad line order length");
      std::copy(v.begin(), v.end(), g.order.begin());
      break;
    }
    case GoalKind::Gather:
      g.center = j.at("center").get<int>();
      break;
  }
  g.validate();
  return g;
}

}  // namespace

std::string goal_to_json(const GoalSpec& g) { return goal_json(g).dump(); }

GoalSpec goal_from_json(const std::string& text) {
  json j = json::parse(text);
  GoalSpec g = goal_from(j);
  if (j.contains("text")) g.text = j.at("text").get<std::string>();
  return g;
}

std::string episode_to_json(const Episode& ep) {
  json j;
  j["goal_text"] = ep.goal.text;
  j["goal"] = goal_json(ep.goal);
  json states = json::array();
  for (const auto& s : ep.states) states.push_back(s.p);
  j["states"] = std::move(states);
  j["actions"] = ep.actions;
  j["rewards"] = ep.rewards;
  j["success"] = ep.success;
  j["provenance"] = ep.provenance == Provenance::Real ? "real" : "imaginary";
  if (ep.has_validity) {
    j["validity"] = {{"schema_ok", ep.validity.schema_ok},
                     {"bounds_ok", ep.validity.bounds_ok},
                     {"dynamics_consistency", ep.validity.dynamics_consistency}};
  }
  return j.dump();
}

Episode episode_from_json(const std::string& line) {
  json j = json::parse(line);
  Episode ep;
  ep.goal = goal_from(j.at("goal"));
  ep.goal.text = j.at("goal_text").get<std::string>();
  for (const auto& s : j.at("states")) {
    EnvState st;
    auto v = s.get<std::vector<float>>();
    if (v.size() != kStateDim) throw std::invalid_argument("bad state length");
    std::copy(v.begin(), v.end(), st.p.begin());
    ep.states.push_back(st);
  }
  ep.actions = j.at("actions").get<std::vector<int>>();
  ep.rewards = j.at("rewards").get<std::vector<float>>();
  ep.success = j.at("success").get<bool>();
  ep.provenance =
      j.at("provenance").get<std::string>() == "real" ? Provenance::Real : Provenance::Imaginary;
  if (j.contains("validity")) {
    ep.has_validity = true;
    const auto& v = j.at("validity");
    ep.validity.schema_ok = v.at("schema_ok").get<bool>();
    ep.validity.bounds_ok = v.at("bounds_ok").get<bool>();
    ep.validity.dynamics_consistency = v.at("dynamics_consistency").get<double>();
  }
  ep.check_invariants();
  return ep;
}

void write_episodes(const std::vector<Episode>& eps, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& ep : eps) out << episode_to_json(ep) << "\n";
}

std::vector<Episode> read_episodes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open episode file: " + path);
  std::vector<Episode> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(episode_from_json(line));
  }
  return out;
}

}  // namespace rollforge::env
