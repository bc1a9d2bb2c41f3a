#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rollforge/env.hpp"

namespace rollforge::env {

// Line-delimited records, one episode per line. Fields: goal text, goal
// spec, states as float arrays, actions as indices 0..39, rewards, success,
// provenance, and validity for imaginary rollouts. The grammar is documented
// in the README and kept stable.

std::string episode_to_json(const Episode& ep);
Episode episode_from_json(const std::string& line);

void write_episodes(const std::vector<Episode>& eps, const std::string& path);
std::vector<Episode> read_episodes(const std::string& path);

std::string goal_to_json(const GoalSpec& g);
GoalSpec goal_from_json(const std::string& text);

}  // namespace rollforge::env
