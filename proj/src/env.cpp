#include "rollforge/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rollforge::env {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

double sq(double v) { return v * v; }

double dist(const EnvState& s, int i, int j) {
  return std::sqrt(sq(double(s.x(i)) - s.x(j)) + sq(double(s.y(i)) - s.y(j)));
}

}  // namespace

GoalDirection opposite(GoalDirection d) {
  switch (d) {
    case GoalDirection::Left: return GoalDirection::Right;
    case GoalDirection::Right: return GoalDirection::Left;
    case GoalDirection::Front: return GoalDirection::Behind;
    case GoalDirection::Behind: return GoalDirection::Front;
  }
  throw std::invalid_argument("bad direction");
}

const char* direction_word(GoalDirection d) {
  switch (d) {
    case GoalDirection::Left: return "left";
    case GoalDirection::Right: return "right";
    case GoalDirection::Front: return "front";
    case GoalDirection::Behind: return "behind";
  }
  throw std::invalid_argument("bad direction");
}

Compass direction_compass(GoalDirection d) {
  switch (d) {
    case GoalDirection::Left: return Compass::West;
    case GoalDirection::Right: return Compass::East;
    case GoalDirection::Front: return Compass::North;
    case GoalDirection::Behind: return Compass::South;
  }
  throw std::invalid_argument("bad direction");
}

std::array<double, 2> compass_unit(Compass c) {
  switch (c) {
    case Compass::East: return {1.0, 0.0};
    case Compass::NorthEast: return {kSqrtHalf, kSqrtHalf};
    case Compass::North: return {0.0, 1.0};
    case Compass::NorthWest: return {-kSqrtHalf, kSqrtHalf};
    case Compass::West: return {-1.0, 0.0};
    case Compass::SouthWest: return {-kSqrtHalf, -kSqrtHalf};
    case Compass::South: return {0.0, -1.0};
    case Compass::SouthEast: return {kSqrtHalf, -kSqrtHalf};
  }
  throw std::invalid_argument("bad compass index");
}

void EnvConfig::validate() const {
  if (!(arena_min < arena_max)) throw ConfigError("arena_min must be < arena_max");
  if (!(ball_radius > 0)) throw ConfigError("ball_radius must be positive");
  if (!(step_size > 0)) throw ConfigError("step_size must be positive");
  if (min_separation < 2 * ball_radius)
    throw ConfigError("min_separation must be >= ball diameter");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (center_min() >= center_max())
    throw ConfigError("arena too small for ball_radius");
  const double side = arena_max - arena_min - 2 * ball_radius;
  if (min_separation > side * std::sqrt(2.0))
    throw ConfigError("min_separation exceeds the arena diagonal");
}

// --- Actions ---

EnvAction encode_action(int ball, int direction) {
  if (ball < 0 || ball >= kNumBalls) throw std::invalid_argument("ball index out of range");
  if (direction < 0 || direction >= kNumDirections)
    throw std::invalid_argument("direction index out of range");
  EnvAction a;
  a.v[ball * kNumDirections + direction] = 1.0f;
  return a;
}

EnvAction action_from_index(int index) {
  if (index < 0 || index >= kNumActions) throw std::invalid_argument("action index out of range");
  return encode_action(index / kNumDirections, index % kNumDirections);
}

int action_index(const EnvAction& a) {
  int idx = -1;
  for (int i = 0; i < kNumActions; ++i) {
    if (a.v[i] == 1.0f) {
      if (idx >= 0) throw std::invalid_argument("action has multiple set components");
      idx = i;
    } else if (a.v[i] != 0.0f) {
      throw std::invalid_argument("action is not one-hot");
    }
  }
  if (idx < 0) throw std::invalid_argument("action has no set component");
  return idx;
}

std::pair<int, int> decode_action(const EnvAction& a) {
  int idx = action_index(a);
  return {idx / kNumDirections, idx % kNumDirections};
}

// --- Goals ---

const char* level_name(GoalLevel level) {
  switch (level) {
    case GoalLevel::Offline: return "offline";
    case GoalLevel::Rephrasing: return "rephrasing";
    case GoalLevel::UnseenEasy: return "unseen_easy";
    case GoalLevel::UnseenHard: return "unseen_hard";
  }
  throw std::invalid_argument("bad level");
}

const char* kind_name(GoalKind kind) {
  switch (kind) {
    case GoalKind::RelativePosition: return "relative_position";
    case GoalKind::AbsoluteMove: return "absolute_move";
    case GoalKind::Compose2: return "compose2";
    case GoalKind::Compose3: return "compose3";
    case GoalKind::LineArrangement: return "line_arrangement";
    case GoalKind::Gather: return "gather";
  }
  throw std::invalid_argument("bad kind");
}

GoalLevel level_from_name(const std::string& s) {
  for (int i = 0; i < 4; ++i)
    if (s == level_name(static_cast<GoalLevel>(i))) return static_cast<GoalLevel>(i);
  throw std::invalid_argument("unknown goal level: " + s);
}

GoalKind kind_from_name(const std::string& s) {
  for (int i = 0; i < 6; ++i)
    if (s == kind_name(static_cast<GoalKind>(i))) return static_cast<GoalKind>(i);
  throw std::invalid_argument("unknown goal kind: " + s);
}

bool compatible_subgoals(const std::vector<RelativeGoal>& subs) {
  auto axis_of = [](GoalDirection d) {
    return (d == GoalDirection::Left || d == GoalDirection::Right) ? 0 : 1;
  };
  for (size_t i = 0; i < subs.size(); ++i) {
    for (size_t j = i + 1; j < subs.size(); ++j) {
      if (subs[i].target == subs[j].target &&
          axis_of(subs[i].direction) == axis_of(subs[j].direction) &&
          subs[i].direction != subs[j].direction) {
        return false;
      }
      if (subs[i] == subs[j]) return false;
    }
  }
  return true;
}

void GoalSpec::validate() const {
  auto check_ball = [](int b, const char* what) {
    if (b < 0 || b >= kNumBalls) throw std::invalid_argument(std::string(what) + " out of range");
  };
  switch (kind) {
    case GoalKind::RelativePosition:
      check_ball(target, "target");
      check_ball(reference, "reference");
      if (target == reference)
        throw std::invalid_argument("relative goal requires target != reference");
      break;
    case GoalKind::AbsoluteMove:
      check_ball(target, "target");
      break;
    case GoalKind::Compose2:
    case GoalKind::Compose3: {
      const size_t want = kind == GoalKind::Compose2 ? 2 : 3;
      if (subgoals.size() != want)
        throw std::invalid_argument("compose goal has wrong sub-goal count");
      for (const auto& s : subgoals) {
        check_ball(s.target, "sub-goal target");
        check_ball(s.reference, "sub-goal reference");
        if (s.target == s.reference)
          throw std::invalid_argument("sub-goal requires target != reference");
      }
      if (!compatible_subgoals(subgoals))
        throw std::invalid_argument("compose goal has conflicting sub-goals");
      break;
    }
    case GoalKind::LineArrangement: {
      std::array<bool, kNumBalls> seen{};
      for (int b : order) {
        check_ball(b, "order entry");
        if (seen[b]) throw std::invalid_argument("line order repeats a color");
        seen[b] = true;
      }
      break;
    }
    case GoalKind::Gather:
      check_ball(center, "center");
      break;
  }
}

int GoalSpec::subgoal_count() const {
  switch (kind) {
    case GoalKind::RelativePosition:
    case GoalKind::AbsoluteMove: return 1;
    case GoalKind::Compose2: return 2;
    case GoalKind::Compose3: return 3;
    case GoalKind::LineArrangement: return kNumBalls;
    case GoalKind::Gather: return kNumBalls - 1;
  }
  return 1;
}

GoalSpec make_relative_goal(int target, int reference, GoalDirection d, GoalLevel level) {
  GoalSpec g;
  g.level = level;
  g.kind = GoalKind::RelativePosition;
  g.target = target;
  g.reference = reference;
  g.direction = d;
  g.validate();
  return g;
}

GoalSpec make_absolute_goal(int target, GoalDirection d) {
  GoalSpec g;
  g.level = GoalLevel::UnseenEasy;
  g.kind = GoalKind::AbsoluteMove;
  g.target = target;
  g.direction = d;
  g.validate();
  return g;
}

GoalSpec make_compose_goal(const std::vector<RelativeGoal>& subs) {
  GoalSpec g;
  g.level = GoalLevel::UnseenHard;
  g.kind = subs.size() == 2 ? GoalKind::Compose2 : GoalKind::Compose3;
  g.subgoals = subs;
  g.validate();
  return g;
}

GoalSpec make_line_goal(const std::array<int, kNumBalls>& order) {
  GoalSpec g;
  g.level = GoalLevel::UnseenHard;
  g.kind = GoalKind::LineArrangement;
  g.order = order;
  g.validate();
  return g;
}

GoalSpec make_gather_goal(int center) {
  GoalSpec g;
  g.level = GoalLevel::UnseenHard;
  g.kind = GoalKind::Gather;
  g.center = center;
  g.validate();
  return g;
}

// --- Dynamics ---

EnvState reset(uint64_t seed, const EnvConfig& cfg) {
  cfg.validate();
  Rng rng(seed);
  EnvState s;
  int attempts = 0;
  for (int b = 0; b < kNumBalls; ++b) {
    while (true) {
      if (++attempts > cfg.max_reset_attempts)
        throw ConfigError("reset could not place balls; configuration too tight");
      const double px = rng.uniform(cfg.center_min(), cfg.center_max());
      const double py = rng.uniform(cfg.center_min(), cfg.center_max());
      bool ok = true;
      for (int o = 0; o < b; ++o) {
        if (sq(px - s.x(o)) + sq(py - s.y(o)) < sq(cfg.min_separation)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        s.set(b, static_cast<float>(px), static_cast<float>(py));
        break;
      }
    }
  }
  return s;
}

EnvState step_index(const EnvState& s, int action, const EnvConfig& cfg) {
  if (action < 0 || action >= kNumActions)
    throw std::invalid_argument("action index out of range");
  const int ball = action / kNumDirections;
  const auto u = compass_unit(static_cast<Compass>(action % kNumDirections));
  const double px = s.x(ball);
  const double py = s.y(ball);

  // Travel along the ray, truncated by walls and first ball contact.
  double travel = cfg.step_size;
  for (int axis = 0; axis < 2; ++axis) {
    const double ui = u[axis];
    if (ui == 0.0) continue;
    const double pi = axis == 0 ? px : py;
    const double limit = ui > 0 ? cfg.center_max() - pi : pi - cfg.center_min();
    travel = std::min(travel, std::max(0.0, limit / std::abs(ui)));
  }
  const double contact = 2.0 * cfg.ball_radius;
  for (int o = 0; o < kNumBalls; ++o) {
    if (o == ball) continue;
    const double rx = px - s.x(o);
    const double ry = py - s.y(o);
    const double b = 2.0 * (rx * u[0] + ry * u[1]);
    if (b >= 0.0) continue;  // moving away from this ball
    const double c = rx * rx + ry * ry - contact * contact;
    if (c <= 0.0) {
      // already touching (or inside by float rounding) and approaching
      travel = 0.0;
      break;
    }
    const double disc = b * b - 4.0 * c;
    if (disc < 0.0) continue;
    const double t = (-b - std::sqrt(disc)) / 2.0;
    if (t >= 0.0) travel = std::min(travel, t);
  }

  EnvState out = s;
  out.set(ball, static_cast<float>(px + travel * u[0]),
          static_cast<float>(py + travel * u[1]));
  return out;
}

EnvState step(const EnvState& s, const EnvAction& a, const EnvConfig& cfg) {
  return step_index(s, action_index(a), cfg);
}

bool state_in_bounds(const EnvState& s, const EnvConfig& cfg) {
  for (float v : s.p) {
    if (!std::isfinite(v)) return false;
    if (v < cfg.arena_min || v > cfg.arena_max) return false;
  }
  return true;
}

double min_pairwise_distance(const EnvState& s) {
  double best = 1e9;
  for (int i = 0; i < kNumBalls; ++i)
    for (int j = i + 1; j < kNumBalls; ++j) best = std::min(best, dist(s, i, j));
  return best;
}

// --- Predicates and potential ---

namespace {

// Signed displacement of target from reference along the goal direction and
// the magnitude of the orthogonal component.
void relative_components(const EnvState& s, const RelativeGoal& g, double* along,
                         double* ortho) {
  *along = 0;
  *ortho = 0;
  const double dx = double(s.x(g.target)) - s.x(g.reference);
  const double dy = double(s.y(g.target)) - s.y(g.reference);
  switch (g.direction) {
    case GoalDirection::Left: *along = -dx; *ortho = std::abs(dy); break;
    case GoalDirection::Right: *along = dx; *ortho = std::abs(dy); break;
    case GoalDirection::Front: *along = dy; *ortho = std::abs(dx); break;
    case GoalDirection::Behind: *along = -dy; *ortho = std::abs(dx); break;
  }
}

bool relative_satisfied(const EnvState& s, const RelativeGoal& g, const EnvConfig& cfg) {
  double along, ortho;
  relative_components(s, g, &along, &ortho);
  return along > cfg.margin && along > ortho;
}

// Dense violation for the shaped reward. Zero only strictly inside the
// satisfied region (dominance epsilon) and with clearance from the reference,
// so the greedy expert steps around head-on contact instead of stalling.
// Weights keep |delta| <= 2 * step_size per single-ball move.
constexpr double kDominanceEpsilon = 0.02;
constexpr double kAxisWeight = 0.8;
constexpr double kClearWeight = 0.4;

double relative_violation(const EnvState& s, const RelativeGoal& g, const EnvConfig& cfg) {
  double along, ortho;
  relative_components(s, g, &along, &ortho);
  const double axis_term =
      std::max(0.0, std::max(cfg.margin, ortho) + kDominanceEpsilon - along);
  const double dx = double(s.x(g.target)) - s.x(g.reference);
  const double dy = double(s.y(g.target)) - s.y(g.reference);
  const double clearance = 2.0 * cfg.ball_radius + cfg.margin - 0.02;
  const double clear_term = std::max(0.0, clearance - std::sqrt(dx * dx + dy * dy));
  return kAxisWeight * axis_term + kClearWeight * clear_term;
}

// Principal-axis fit of the five centers: returns the unit direction of the
// major axis (oriented toward +x, or +y when vertical) and the RMS residual
// orthogonal to it.
void principal_axis(const EnvState& s, double* ux, double* uy, double* rms) {
  double mx = 0, my = 0;
  for (int i = 0; i < kNumBalls; ++i) {
    mx += s.x(i);
    my += s.y(i);
  }
  mx /= kNumBalls;
  my /= kNumBalls;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < kNumBalls; ++i) {
    const double dx = s.x(i) - mx;
    const double dy = s.y(i) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  sxx /= kNumBalls;
  sxy /= kNumBalls;
  syy /= kNumBalls;
  const double tr = sxx + syy;
  const double det = sxx * syy - sxy * sxy;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double l_major = tr / 2.0 + disc;
  const double l_minor = tr / 2.0 - disc;
  // Eigenvector for the major eigenvalue.
  double ex, ey;
  if (std::abs(sxy) > 1e-12) {
    ex = l_major - syy;
    ey = sxy;
  } else if (sxx >= syy) {
    ex = 1.0;
    ey = 0.0;
  } else {
    ex = 0.0;
    ey = 1.0;
  }
  const double n = std::sqrt(ex * ex + ey * ey);
  ex /= n;
  ey /= n;
  if (ex < 0 || (ex == 0 && ey < 0)) {
    ex = -ex;
    ey = -ey;
  }
  *ux = ex;
  *uy = ey;
  *rms = std::sqrt(std::max(0.0, l_minor));
}

bool line_satisfied(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg) {
  double ux, uy, rms;
  principal_axis(s, &ux, &uy, &rms);
  if (rms >= cfg.line_tolerance) return false;
  double prev = -1e18;
  for (int k = 0; k < kNumBalls; ++k) {
    const int b = g.order[k];
    const double proj = ux * s.x(b) + uy * s.y(b);
    if (proj <= prev) return false;
    prev = proj;
  }
  return true;
}

// Potential for line goals uses the horizontal-line form (the shipped line
// goals read left to right): vertical spread around the mean plus ordering
// slack along x. The satisfaction predicate stays the principal-axis fit.
double line_violation(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg) {
  double my = 0;
  for (int i = 0; i < kNumBalls; ++i) my += s.y(i);
  my /= kNumBalls;
  double v = 0;
  for (int i = 0; i < kNumBalls; ++i) v += std::abs(s.y(i) - my);
  const double gap = 2.0 * cfg.ball_radius;
  for (int k = 0; k + 1 < kNumBalls; ++k) {
    const double xa = s.x(g.order[k]);
    const double xb = s.x(g.order[k + 1]);
    v += std::max(0.0, xa - xb + gap);
  }
  return v;
}

bool gather_satisfied(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg) {
  for (int i = 0; i < kNumBalls; ++i) {
    if (i == g.center) continue;
    if (dist(s, i, g.center) > cfg.gather_radius) return false;
  }
  return true;
}

double gather_violation(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg) {
  double v = 0;
  for (int i = 0; i < kNumBalls; ++i) {
    if (i == g.center) continue;
    v += std::max(0.0, dist(s, i, g.center) - cfg.gather_radius);
  }
  return v;
}

}  // namespace

bool goal_satisfied(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg) {
  g.validate();
  switch (g.kind) {
    case GoalKind::RelativePosition:
      return relative_satisfied(s, {g.target, g.reference, g.direction}, cfg);
    case GoalKind::AbsoluteMove:
      throw std::invalid_argument(
          "absolute_move is not a state predicate; judge it on episodes");
    case GoalKind::Compose2:
    case GoalKind::Compose3:
      for (const auto& sub : g.subgoals)
        if (!relative_satisfied(s, sub, cfg)) return false;
      return true;
    case GoalKind::LineArrangement:
      return line_satisfied(s, g, cfg);
    case GoalKind::Gather:
      return gather_satisfied(s, g, cfg);
  }
  throw std::invalid_argument("bad goal kind");
}

double potential(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg) {
  switch (g.kind) {
    case GoalKind::RelativePosition:
      return -relative_violation(s, {g.target, g.reference, g.direction}, cfg);
    case GoalKind::AbsoluteMove:
      throw std::invalid_argument("absolute_move has no state potential");
    case GoalKind::Compose2:
    case GoalKind::Compose3: {
      double v = 0;
      for (const auto& sub : g.subgoals) v += relative_violation(s, sub, cfg);
      return -v;
    }
    case GoalKind::LineArrangement:
      return -line_violation(s, g, cfg);
    case GoalKind::Gather:
      return -gather_violation(s, g, cfg);
  }
  throw std::invalid_argument("bad goal kind");
}

double reward_index(const EnvState& s, int action, const EnvState& s_next,
                    const GoalSpec& g, const EnvConfig& cfg) {
  (void)action;  // shaping depends on states only
  const double shaped = potential(s_next, g, cfg) - potential(s, g, cfg);
  const double bonus = goal_satisfied(s_next, g, cfg) ? cfg.success_bonus : 0.0;
  return shaped + bonus;
}

double reward(const EnvState& s, const EnvAction& a, const EnvState& s_next,
              const GoalSpec& g, const EnvConfig& cfg) {
  return reward_index(s, action_index(a), s_next, g, cfg);
}

int scripted_expert_index(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg) {
  int best = 0;
  double best_phi = -1e300;
  for (int a = 0; a < kNumActions; ++a) {
    const double phi = potential(step_index(s, a, cfg), g, cfg);
    if (phi > best_phi) {
      best_phi = phi;
      best = a;
    }
  }
  return best;
}

EnvAction scripted_expert(const EnvState& s, const GoalSpec& g, const EnvConfig& cfg) {
  return action_from_index(scripted_expert_index(s, g, cfg));
}

// --- Episodes ---

void Episode::check_invariants() const {
  if (actions.empty()) throw std::invalid_argument("episode must have T >= 1");
  if (states.size() != actions.size() + 1)
    throw std::invalid_argument("episode needs len(states) == len(actions) + 1");
  if (rewards.size() != actions.size())
    throw std::invalid_argument("episode needs len(rewards) == len(actions)");
  goal.validate();
}

Episode collect_episode(const EnvConfig& cfg, const GoalSpec& goal, uint64_t seed) {
  Episode ep;
  ep.goal = goal;
  ep.provenance = Provenance::Real;
  ep.states.push_back(reset(seed, cfg));
  for (int t = 0; t < cfg.horizon; ++t) {
    const EnvState& cur = ep.states.back();
    const int a = scripted_expert_index(cur, goal, cfg);
    const EnvState next = step_index(cur, a, cfg);
    ep.actions.push_back(a);
    ep.rewards.push_back(static_cast<float>(reward_index(cur, a, next, goal, cfg)));
    ep.states.push_back(next);
    if (goal_satisfied(next, goal, cfg)) {
      ep.success = true;
      break;
    }
  }
  return ep;
}

std::vector<Episode> collect_dataset(int n_episodes, const EnvConfig& cfg,
                                     uint64_t seed, const GoalSampler& sample_goal) {
  if (n_episodes < 0) throw std::invalid_argument("n_episodes must be >= 0");
  std::vector<Episode> out;
  out.reserve(n_episodes);
  for (int i = 0; i < n_episodes; ++i) {
    const uint64_t ep_seed = derive_seed(seed, static_cast<uint64_t>(i));
    Rng goal_rng(derive_seed(ep_seed, "goal"));
    const GoalSpec goal = sample_goal(goal_rng);
    out.push_back(collect_episode(cfg, goal, derive_seed(ep_seed, "reset")));
  }
  return out;
}

}  // namespace rollforge::env
