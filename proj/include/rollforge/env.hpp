#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rollforge/common.hpp"

namespace rollforge::env {

inline constexpr int kNumBalls = 5;
inline constexpr int kNumDirections = 8;
inline constexpr int kNumActions = kNumBalls * kNumDirections;
inline constexpr int kStateDim = 2 * kNumBalls;

// Ball colors are fixed by index.
inline constexpr std::array<const char*, kNumBalls> kBallColors = {
    "red", "blue", "green", "purple", "cyan"};

// Compass directions for the action set, counter-clockwise from +x.
// Index k points at angle k * 45 degrees.
enum class Compass : int {
  East = 0,
  NorthEast = 1,
  North = 2,
  NorthWest = 3,
  West = 4,
  SouthWest = 5,
  South = 6,
  SouthEast = 7,
};

// Axis convention: left = -x, right = +x, front = +y, behind = -y.
enum class GoalDirection : int { Left = 0, Right = 1, Front = 2, Behind = 3 };

GoalDirection opposite(GoalDirection d);
const char* direction_word(GoalDirection d);   // "left", "right", "front", "behind"
Compass direction_compass(GoalDirection d);    // cardinal compass index of a goal direction
// Unit vector of a compass direction (doubles, diagonals are sqrt(1/2)).
std::array<double, 2> compass_unit(Compass c);

struct EnvConfig {
  double arena_min = -1.0;
  double arena_max = 1.0;
  double ball_radius = 0.05;
  double step_size = 0.1;
  double min_separation = 0.2;  // reset-time pairwise spacing
  int horizon = 30;
  double margin = 0.1;          // relative-position margin
  double line_tolerance = 0.05; // best-fit-line RMS residual bound
  double gather_radius = 0.4;
  double success_bonus = 1.0;
  int max_reset_attempts = 10000;

  void validate() const;  // throws ConfigError
  double center_min() const { return arena_min + ball_radius; }
  double center_max() const { return arena_max - ball_radius; }
};

struct EnvState {
  std::array<float, kStateDim> p{};

  float x(int ball) const { return p[2 * ball]; }
  float y(int ball) const { return p[2 * ball + 1]; }
  void set(int ball, float px, float py) {
    p[2 * ball] = px;
    p[2 * ball + 1] = py;
  }
  bool operator==(const EnvState& o) const { return p == o.p; }
};

struct EnvAction {
  std::array<float, kNumActions> v{};
  bool operator==(const EnvAction& o) const { return v == o.v; }
};

// --- Actions: one-hot index = ball * 8 + direction ---

EnvAction encode_action(int ball, int direction);
EnvAction action_from_index(int index);
std::pair<int, int> decode_action(const EnvAction& a);  // (ball, direction)
int action_index(const EnvAction& a);                   // validates the one-hot

// --- Goals ---

enum class GoalLevel : int { Offline = 0, Rephrasing = 1, UnseenEasy = 2, UnseenHard = 3 };
enum class GoalKind : int {
  RelativePosition = 0,
  AbsoluteMove = 1,
  Compose2 = 2,
  Compose3 = 3,
  LineArrangement = 4,
  Gather = 5,
};

const char* level_name(GoalLevel level);
const char* kind_name(GoalKind kind);
GoalLevel level_from_name(const std::string& s);
GoalKind kind_from_name(const std::string& s);

struct RelativeGoal {
  int target = -1;
  int reference = -1;
  GoalDirection direction = GoalDirection::Left;
  bool operator==(const RelativeGoal&) const = default;
};

struct GoalSpec {
  GoalLevel level = GoalLevel::Offline;
  GoalKind kind = GoalKind::RelativePosition;
  // relative_position / absolute_move
  int target = -1;
  int reference = -1;
  GoalDirection direction = GoalDirection::Left;
  // compose2 / compose3
  std::vector<RelativeGoal> subgoals;
  // line_arrangement: all five colors exactly once, listed left to right
  std::array<int, kNumBalls> order = {0, 1, 2, 3, 4};
  // gather
  int center = -1;
  // rendered natural-language text
  std::string text;

  void validate() const;  // throws std::invalid_argument
  // Sub-goal count used for the reward bound: relative/absolute 1,
  // compose k, gather 4, line 5.
  int subgoal_count() const;
};

GoalSpec make_relative_goal(int target, int reference, GoalDirection d,
                            GoalLevel level = GoalLevel::Offline);
GoalSpec make_absolute_goal(int target, GoalDirection d);
GoalSpec make_compose_goal(const std::vector<RelativeGoal>& subs);
GoalSpec make_line_goal(const std::array<int, kNumBalls>& order);
GoalSpec make_gather_goal(int center);

// True when no two sub-goals constrain the same (target, axis) oppositely.
bool compatible_subgoals(const std::vector<RelativeGoal>& subs);

// --- Dynamics ---

// Uniform placement with rejection until pairwise distance >= min_separation.
EnvState reset(uint64_t seed, const EnvConfig& cfg);

// Selected ball translates by step_size along the commanded compass unit;
// travel stops at the arena wall or at first contact with another ball
// (center distance 2 * ball_radius). Other balls never move.
EnvState step(const EnvState& s, const EnvAction& a, const EnvConfig& cfg);
EnvState step_index(const EnvState& s, int action, const EnvConfig& cfg);

bool state_in_bounds(const EnvState& s, const EnvConfig& cfg);
double min_pairwise_distance(const EnvState& s);

// --- Predicates, potential, reward ---

// State predicate; throws std::invalid_argument for absolute_move, which is
// an episode-level judgment (see evalkit).
bool goal_satisfied(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg);

// Phi = negative total violation distance; zero exactly on satisfied states
// (up to the open/closed boundary).
double potential(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg);

// Shaped reward: Phi(s') - Phi(s) + bonus * [goal_satisfied(s')].
double reward(const EnvState& s, const EnvAction& a, const EnvState& s_next,
              const GoalSpec& g, const EnvConfig& cfg);
double reward_index(const EnvState& s, int action, const EnvState& s_next,
                    const GoalSpec& g, const EnvConfig& cfg);

// One-step lookahead argmax of Phi over all 40 actions, ties to the lowest
// action index.
EnvAction scripted_expert(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg);
int scripted_expert_index(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg);

// --- Episodes ---

enum class Provenance : int { Real = 0, Imaginary = 1 };

struct RolloutValidity {
  bool schema_ok = true;
  bool bounds_ok = true;
  double dynamics_consistency = 0.0;  // mean ||s_{t+1} - step(s_t, a_t)||
};

struct Episode {
  GoalSpec goal;
  std::vector<EnvState> states;  // length T + 1
  std::vector<int> actions;      // indices 0..39, length T
  std::vector<float> rewards;    // length T
  bool success = false;
  Provenance provenance = Provenance::Real;
  bool has_validity = false;     // set for imaginary rollouts
  RolloutValidity validity;

  int length() const { return static_cast<int>(actions.size()); }
  void check_invariants() const;  // throws std::invalid_argument
};

// Rolls the expert until first success or the horizon; goals come from the
// sampler so the corpus module can inject text rendering.
using GoalSampler = std::function<GoalSpec(Rng&)>;

Episode collect_episode(const EnvConfig& cfg, const GoalSpec& goal, uint64_t seed);
std::vector<Episode> collect_dataset(int n_episodes, const EnvConfig& cfg,
                                     uint64_t seed, const GoalSampler& sample_goal);

}  // namespace rollforge::env
