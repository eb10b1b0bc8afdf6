#pragma once

#include "manikin/controllers.hpp"
#include "manikin/world.hpp"

namespace manikin {

// ------------------------------------------------------------ motion scale

enum class SkeletonScope { Hand, UpperExtremities, WholeBody };
enum class Spatiotemporal { Local, Room, Route };
enum class Strategy { SingleCompositor, AugmentedObject, Crowd };

inline const char* skeleton_scope_name(SkeletonScope s) {
  switch (s) {
    case SkeletonScope::Hand: return "Hand";
    case SkeletonScope::UpperExtremities: return "UpperExtremities";
    case SkeletonScope::WholeBody: return "WholeBody";
  }
  return "?";
}

inline const char* spatiotemporal_name(Spatiotemporal s) {
  switch (s) {
    case Spatiotemporal::Local: return "Local";
    case Spatiotemporal::Room: return "Room";
    case Spatiotemporal::Route: return "Route";
  }
  return "?";
}

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::SingleCompositor: return "SingleCompositor";
    case Strategy::AugmentedObject: return "AugmentedObject";
    case Strategy::Crowd: return "Crowd";
  }
  return "?";
}

/// Where a task sits in the three-axis motion-scale space: how much of the
/// skeleton it animates, how many manikins it needs, and how far it ranges.
struct MotionScalePoint {
  SkeletonScope skeleton_scope = SkeletonScope::Hand;
  int vh_count = 1;
  Spatiotemporal spatiotemporal = Spatiotemporal::Local;
};

namespace detail {

inline Vec3 goal_primary_location(const Goal& goal, const World& world) {
  if (goal.location) return *goal.location;
  const RigidObject* obj = world.find_object(goal.object);
  if (obj != nullptr) return obj->pose.translation;
  throw Error(ErrorCode::UnplannableGoal,
              "goal " + goal.id + " has no resolvable location");
}

inline const ManikinInstance& manikin_of(const World& world, int id) {
  for (const ManikinInstance& m : world.manikins)
    if (m.id == id) return m;
  throw Error(ErrorCode::ValidationError,
              "unknown manikin " + std::to_string(id));
}

inline Vec2 root_xy(const ManikinInstance& m) {
  if (m.skeleton->free_flyer) {
    const int o = m.skeleton->root_dof_offset();
    return Vec2(m.state.q[o], m.state.q[o + 1]);
  }
  return Vec2::Zero();
}

}  // namespace detail

inline MotionScalePoint classify_motion_scale(const Goal& goal, const World& world) {
  const Thresholds& th = world.thresholds;
  const ManikinInstance& m = detail::manikin_of(world, goal.manikin);
  const Vec3 target = detail::goal_primary_location(goal, world);

  MotionScalePoint p;
  double hand_dist = std::numeric_limits<double>::infinity();
  for (size_t h = 0; h < m.config.hands.size(); ++h)
    hand_dist = std::min(hand_dist,
                         (detail::hand_world(m, static_cast<int>(h)) - target).norm());
  const double root_dist =
      (detail::root_xy(m) - Vec2(target.x(), target.y())).norm();
  if (hand_dist <= th.forearm_envelope)
    p.skeleton_scope = SkeletonScope::Hand;
  else if (root_dist <= th.standing_reach)
    p.skeleton_scope = SkeletonScope::UpperExtremities;
  else
    p.skeleton_scope = SkeletonScope::WholeBody;

  if (goal.kind == GoalKind::LiftTogether) {
    int needed = 2;
    const RigidObject* obj = world.find_object(goal.object);
    if (obj != nullptr)
      needed = std::max(needed, static_cast<int>(
                                    std::ceil(obj->mass / th.carry_capacity)));
    p.vh_count = std::max(needed, static_cast<int>(goal.group.size()));
  } else {
    p.vh_count = 1;
  }

  if (root_dist <= th.local_range)
    p.spatiotemporal = Spatiotemporal::Local;
  else if (root_dist <= th.room_range)
    p.spatiotemporal = Spatiotemporal::Room;
  else
    p.spatiotemporal = Spatiotemporal::Route;
  return p;
}

/// Strategy choice over the motion-scale space: one manikin runs through a
/// single compositor; a small group with a shared object is controlled as an
/// augmented object; a large group without one is a crowd.
inline Strategy select_strategy(const MotionScalePoint& p, bool shared_object_goal) {
  if (p.vh_count <= 1) return Strategy::SingleCompositor;
  if (shared_object_goal && p.vh_count <= 4) return Strategy::AugmentedObject;
  return Strategy::Crowd;
}

// ------------------------------------------------------------- decompose

namespace detail {

inline MovementRequest make_walk(const Vec3& target) {
  MovementRequest r;
  r.kind = MovementKind::WalkTo;
  r.target = target;
  return r;
}

inline MovementRequest make_reach(const Vec3& target, const std::string& hand) {
  MovementRequest r;
  r.kind = MovementKind::Reach;
  r.target = target;
  r.hand = hand;
  return r;
}

inline MovementRequest make_grasp(const std::string& object, const std::string& hand) {
  MovementRequest r;
  r.kind = MovementKind::Grasp;
  r.object = object;
  r.hand = hand;
  return r;
}

inline MovementRequest make_release(const std::string& hand) {
  MovementRequest r;
  r.kind = MovementKind::Release;
  r.hand = hand;
  return r;
}

inline Vec3 standoff_point(const Vec2& from, const Vec3& target, double standoff) {
  Vec2 dir = Vec2(target.x(), target.y()) - from;
  const double d = dir.norm();
  if (d < 1e-9) dir = Vec2(1, 0); else dir /= d;
  const Vec2 stop = Vec2(target.x(), target.y()) - standoff * dir;
  return Vec3(stop.x(), stop.y(), 0.0);
}

inline Vec3 grasp_point_world(const RigidObject& obj, int index) {
  if (obj.grasp_points.empty()) return obj.pose.translation;
  return obj.pose.apply(obj.grasp_points[index]);
}

inline const RigidObject& require_object(const World& world, const std::string& id,
                                         const std::string& goal_id) {
  const RigidObject* obj = world.find_object(id);
  if (obj == nullptr)
    throw Error(ErrorCode::UnplannableGoal,
                "goal " + goal_id + ": unknown object " + id);
  return *obj;
}

}  // namespace detail

/// Decompose a high-level goal into the ordered simple movements that realize
/// it, consulting the current world (a WalkTo is skipped when the manikin is
/// already in place, a Reach when the hand is already on the object).
inline MovementQueue decompose(const Goal& goal, const World& world) {
  const Thresholds& th = world.thresholds;
  const ManikinInstance& m = detail::manikin_of(world, goal.manikin);
  const Vec2 root = detail::root_xy(m);
  MovementQueue queue;

  const std::string hand0 =
      m.config.hands.empty() ? std::string() : m.config.hands.front().name;
  const std::string hand1 = m.config.hands.size() > 1 ? m.config.hands[1].name
                                                      : hand0;

  switch (goal.kind) {
    case GoalKind::MoveTo: {
      if (!goal.location)
        throw Error(ErrorCode::UnplannableGoal, "MoveTo without location");
      const Vec2 target(goal.location->x(), goal.location->y());
      if ((target - root).norm() > th.walk_success)
        queue.push_back(detail::make_walk(*goal.location));
      break;
    }

    case GoalKind::PickAndPlace: {
      const RigidObject& obj = detail::require_object(world, goal.object, goal.id);
      if (!goal.place)
        throw Error(ErrorCode::UnplannableGoal, "PickAndPlace without place");
      const Vec3 grasp = detail::grasp_point_world(
          obj, detail::nearest_grasp_index(obj, detail::hand_world(m, 0)));
      if (grasp.z() > 2.2)
        throw Error(ErrorCode::UnplannableGoal,
                    "goal " + goal.id + ": object out of reach height");
      const double root_dist = (Vec2(grasp.x(), grasp.y()) - root).norm();
      if (root_dist > th.standing_reach)
        queue.push_back(detail::make_walk(
            detail::standoff_point(root, grasp, th.walk_standoff)));
      if ((detail::hand_world(m, 0) - grasp).norm() > th.grasp_distance)
        queue.push_back(detail::make_reach(grasp, hand0));
      queue.push_back(detail::make_grasp(goal.object, hand0));
      const Vec2 here = root_dist > th.standing_reach
                            ? Vec2(grasp.x(), grasp.y())
                            : root;
      if ((Vec2(goal.place->x(), goal.place->y()) - here).norm() >
          th.standing_reach)
        queue.push_back(detail::make_walk(
            detail::standoff_point(here, *goal.place, th.walk_standoff)));
      queue.push_back(detail::make_reach(*goal.place, hand0));
      queue.push_back(detail::make_release(hand0));
      break;
    }

    case GoalKind::RemovePart: {
      const RigidObject& part = detail::require_object(world, goal.object, goal.id);
      if (!goal.extraction)
        throw Error(ErrorCode::UnplannableGoal, "RemovePart without extraction point");
      const Vec3 part_grasp = detail::grasp_point_world(
          part, detail::nearest_grasp_index(part, detail::hand_world(m, 0)));
      if (part_grasp.z() > 2.2)
        throw Error(ErrorCode::UnplannableGoal,
                    "goal " + goal.id + ": part out of reach height");
      if ((Vec2(part_grasp.x(), part_grasp.y()) - root).norm() > th.standing_reach)
        queue.push_back(detail::make_walk(
            detail::standoff_point(root, part_grasp, th.walk_standoff)));
      std::string part_hand = hand0;
      if (!goal.tool.empty()) {
        const RigidObject& tool = detail::require_object(world, goal.tool, goal.id);
        const Vec3 tool_grasp = detail::grasp_point_world(
            tool, detail::nearest_grasp_index(tool, detail::hand_world(m, 0)));
        queue.push_back(detail::make_reach(tool_grasp, hand0));
        queue.push_back(detail::make_grasp(goal.tool, hand0));
        part_hand = hand1;
      }
      queue.push_back(detail::make_reach(part_grasp, part_hand));
      queue.push_back(detail::make_grasp(goal.object, part_hand));
      queue.push_back(detail::make_reach(*goal.extraction, part_hand));
      queue.push_back(detail::make_release(part_hand));
      break;
    }

    case GoalKind::LiftTogether: {
      const RigidObject& obj = detail::require_object(world, goal.object, goal.id);
      // this manikin's grasp point: its rank in the group picks the slot
      int rank = 0;
      for (size_t i = 0; i < goal.group.size(); ++i)
        if (goal.group[i] == goal.manikin) rank = static_cast<int>(i);
      const int gi = obj.grasp_points.empty()
                         ? 0
                         : rank % static_cast<int>(obj.grasp_points.size());
      const Vec3 grasp = detail::grasp_point_world(obj, gi);
      const bool attached =
          world.find_attachment(goal.manikin, 0) != nullptr;
      if (!attached) {
        if ((Vec2(grasp.x(), grasp.y()) - root).norm() > th.standing_reach)
          queue.push_back(detail::make_walk(
              detail::standoff_point(root, grasp, th.walk_standoff)));
        if ((detail::hand_world(m, 0) - grasp).norm() > th.grasp_distance)
          queue.push_back(detail::make_reach(grasp, hand0));
        queue.push_back(detail::make_grasp(goal.object, hand0));
      }
      MovementRequest hold;
      hold.kind = MovementKind::HoldPosture;
      auto it = goal.params.find("hold_duration");
      hold.params["duration"] = it != goal.params.end() ? it->second : 2.0;
      queue.push_back(hold);
      break;
    }
  }
  return queue;
}

// ----------------------------------------------------------------- rules

/// Apply the first matching rule (by ascending priority) to the event; at
/// most one rule fires per event. Returns the id of the fired rule.
inline std::optional<int> apply_rules(const Event& event, ManikinInstance& m,
                                      World& world) {
  const Rule* chosen = nullptr;
  for (const Rule& rule : m.behavior.rules) {
    if (rule.event_type != event.type) continue;
    if (!rule.request_kind.empty()) {
      if (!event.detail.contains("kind") ||
          event.detail["kind"].get<std::string>() != rule.request_kind)
        continue;
    }
    if (chosen == nullptr || rule.priority < chosen->priority) chosen = &rule;
  }
  if (chosen == nullptr) return std::nullopt;

  switch (chosen->action) {
    case RuleAction::Replan: {
      if (m.behavior.replans_left > 0 && !m.behavior.done) {
        --m.behavior.replans_left;
        const Goal* goal = nullptr;
        for (const Goal& g : m.behavior.goals)
          if (g.id == m.behavior.fsm.current) goal = &g;
        if (goal != nullptr) {
          m.queue = decompose(*goal, world);
          m.comp.blocked = false;
        }
      }
      break;
    }
    case RuleAction::Abort: {
      m.queue.clear();
      m.comp.blocked = false;
      m.behavior.done = true;
      break;
    }
    case RuleAction::InsertMovement: {
      if (chosen->insert) m.queue.push_front(*chosen->insert);
      m.comp.blocked = false;
      break;
    }
    case RuleAction::SwitchGoal: {
      for (const Goal& g : m.behavior.goals) {
        if (g.id == chosen->switch_goal) {
          m.behavior.fsm.current = g.id;
          m.queue = decompose(g, world);
          m.comp.blocked = false;
          break;
        }
      }
      break;
    }
  }
  return chosen->id;
}

// ------------------------------------------------------------- goal check

inline bool goal_satisfied(const Goal& goal, const World& world) {
  const Thresholds& th = world.thresholds;
  const ManikinInstance& m = detail::manikin_of(world, goal.manikin);
  switch (goal.kind) {
    case GoalKind::MoveTo: {
      if (!goal.location) return true;
      return (detail::root_xy(m) - Vec2(goal.location->x(), goal.location->y()))
                 .norm() <= th.walk_success;
    }
    case GoalKind::PickAndPlace: {
      const RigidObject* obj = world.find_object(goal.object);
      if (obj == nullptr || !goal.place) return false;
      const Vec3 nearest = detail::grasp_point_world(
          *obj, detail::nearest_grasp_index(*obj, *goal.place));
      return (nearest - *goal.place).norm() <= 2.0 * th.reach_success + 0.01;
    }
    case GoalKind::RemovePart: {
      const RigidObject* obj = world.find_object(goal.object);
      if (obj == nullptr || !goal.extraction) return false;
      const Vec3 nearest = detail::grasp_point_world(
          *obj, detail::nearest_grasp_index(*obj, *goal.extraction));
      return (nearest - *goal.extraction).norm() <= 2.0 * th.reach_success + 0.01;
    }
    case GoalKind::LiftTogether: {
      const RigidObject* obj = world.find_object(goal.object);
      if (obj == nullptr) return false;
      // holding counts once the hold request has been executed
      return m.queue.empty() && m.comp.phase == CompositorPhase::Idle;
    }
  }
  return false;
}

/// Build the goal-sequence FSM for one manikin: one state per goal, advanced
/// by goal_done events, terminating in "done".
inline void init_behavior(ManikinInstance& m, const World& world) {
  BehaviorFsm& fsm = m.behavior.fsm;
  fsm.states.clear();
  fsm.transitions.clear();
  for (const Goal& g : m.behavior.goals) fsm.states.push_back(g.id);
  fsm.states.push_back("done");
  for (size_t i = 0; i + 1 < fsm.states.size(); ++i)
    fsm.transitions[{fsm.states[i], "goal_done"}] = fsm.states[i + 1];
  if (m.behavior.goals.empty()) {
    fsm.current = "done";
    m.behavior.done = true;
  } else {
    fsm.current = m.behavior.goals.front().id;
    m.queue = decompose(m.behavior.goals.front(), world);
  }
}

/// Per-tick behaviour update for one manikin: react to the event batch, then
/// advance the goal FSM when the compositor has gone idle.
inline void behavior_tick(World& world, ManikinInstance& m,
                          const std::vector<Event>& batch) {
  for (const Event& e : batch) {
    if (e.manikin != m.id) continue;
    apply_rules(e, m, world);
  }
  if (m.behavior.done || m.comp.blocked) return;
  if (m.comp.phase != CompositorPhase::Idle || !m.queue.empty()) return;

  const Goal* goal = nullptr;
  for (const Goal& g : m.behavior.goals)
    if (g.id == m.behavior.fsm.current) goal = &g;
  if (goal == nullptr) {
    m.behavior.done = true;
    return;
  }
  if (goal_satisfied(*goal, world)) {
    auto it = m.behavior.fsm.transitions.find({m.behavior.fsm.current, "goal_done"});
    m.behavior.fsm.current = it != m.behavior.fsm.transitions.end()
                                 ? it->second
                                 : std::string("done");
    if (m.behavior.fsm.current == "done") {
      m.behavior.done = true;
      return;
    }
    for (const Goal& g : m.behavior.goals) {
      if (g.id == m.behavior.fsm.current) {
        m.queue = decompose(g, world);
        break;
      }
    }
  } else if (m.behavior.replans_left > 0) {
    --m.behavior.replans_left;
    m.queue = decompose(*goal, world);
  } else {
    m.behavior.done = true;  // out of replans; give up on this goal
  }
}

}  // namespace manikin
