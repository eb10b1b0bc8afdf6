#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "manikin/crowd.hpp"
#include "manikin/geometry2d.hpp"
#include "manikin/skeleton.hpp"

namespace manikin {

// ---------------------------------------------------------------- requests

enum class MovementKind { Reach, Grasp, Release, WalkTo, HoldPosture,
                          RecoverBalance, Fall };

inline const char* movement_kind_name(MovementKind k) {
  switch (k) {
    case MovementKind::Reach: return "Reach";
    case MovementKind::Grasp: return "Grasp";
    case MovementKind::Release: return "Release";
    case MovementKind::WalkTo: return "WalkTo";
    case MovementKind::HoldPosture: return "HoldPosture";
    case MovementKind::RecoverBalance: return "RecoverBalance";
    case MovementKind::Fall: return "Fall";
  }
  return "?";
}

/// One simple movement. Reach/WalkTo carry a point target; Grasp/Release an
/// object id; params hold scalar tuning (e.g. HoldPosture duration).
struct MovementRequest {
  MovementKind kind = MovementKind::HoldPosture;
  std::optional<Vec3> target;
  std::string object;
  std::string hand;  // empty = first hand
  std::map<std::string, double> params;
};

using MovementQueue = std::deque<MovementRequest>;

// ----------------------------------------------------------------- objects

struct RigidObject {
  std::string id;
  double mass = 1.0;
  Mat3 inertia = Mat3::Identity();  // about the COM (frame origin)
  Transform pose;
  Vec6 twist = Vec6::Zero();        // world linear, then angular
  std::vector<Vec3> grasp_points;   // in the object frame
};

/// Rigid weld between a manikin hand and an object grasp point.
struct Attachment {
  int manikin = -1;
  int hand = -1;
  std::string object;
  int grasp_index = 0;
  Transform hand_to_object;  // object pose = hand pose * hand_to_object
};

struct Obstacle {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
};

// ------------------------------------------------------------ manikin setup

struct HandSpec {
  std::string name;
  int link = -1;
  Vec3 point = Vec3::Zero();  // in the link frame
};

struct FootSpec {
  int link = -1;
  std::vector<Vec3> corners;  // in the link frame
};

struct HeadSpec {
  int link = -1;
  Vec3 gaze_axis = Vec3::UnitX();  // in the link frame
};

/// Tunables shared by the controllers and the behaviour layer. The defaults
/// are the shipped values; any of them can be overridden from the scenario.
struct Thresholds {
  double reach_success = 0.02;      // m
  double grasp_distance = 0.05;     // m
  double balance_margin = 0.01;     // m, polygon deflation for "safely inside"
  double recover_band = 0.05;       // m, polygon inflation for "recoverable"
  double walk_speed = 1.0;          // m/s
  double walk_success = 0.05;       // m
  double posture_tol_q = 0.01;      // rad
  double posture_tol_qd = 0.01;     // rad/s
  double balance_qd_tol = 0.05;     // rad/s
  double fall_qd_tol = 0.02;        // rad/s
  double fallen_root_z = 0.35;      // m
  double ground_root_z = 0.15;      // m, hard clamp for a collapsing root
  double forearm_envelope = 0.45;   // m
  double standing_reach = 0.9;      // m
  double local_range = 1.0;         // m
  double room_range = 10.0;         // m
  int max_collab_group = 4;
  double carry_capacity = 60.0;     // kg per manikin before help is needed
  double perf_time_weight = 1.0;
  double perf_energy_weight = 0.1;
  double reach_joint_speed = 2.5;   // rad/s cap on prescribed reach motion
  double hand_speed = 0.5;          // m/s, used by performance estimates
  double fall_damping = 3.0;        // N*m*s/rad per unit diagonal inertia
  double walk_standoff = 0.55;      // m kept between root and a walk target
  double gait_amplitude = 0.25;     // rad of hip/knee swing while walking
};

/// Joint taking part in the canned walking swing pattern.
struct GaitJoint {
  int joint = 0;
  double scale = 1.0;
  double phase = 0.0;
};

struct ManikinConfig {
  std::vector<HandSpec> hands;
  std::vector<FootSpec> feet;
  HeadSpec head;
  std::vector<GaitJoint> gait;
  VecX kp;         // per-joint posture gains (joint coords only)
  VecX kd;
  VecX q_default;  // full dof
};

// ------------------------------------------------------------- compositor

enum class CompositorPhase { Idle, Executing, Recovering, Falling, Fallen };

inline const char* phase_name(CompositorPhase p) {
  switch (p) {
    case CompositorPhase::Idle: return "Idle";
    case CompositorPhase::Executing: return "Executing";
    case CompositorPhase::Recovering: return "Recovering";
    case CompositorPhase::Falling: return "Falling";
    case CompositorPhase::Fallen: return "Fallen";
  }
  return "?";
}

/// Per-activation scratch owned by the compositor; controllers stay stateless.
struct ActivationScratch {
  VecX q_hold;
  double gait_phase = 0.0;
};

struct CompositorState {
  CompositorPhase phase = CompositorPhase::Idle;
  std::optional<int> active;  // controller id
  std::optional<MovementRequest> active_request;
  State activation_state;
  long ticks_active = 0;
  bool blocked = false;  // a request failed; waiting on the behaviour layer
};

// --------------------------------------------------------------- behaviour

enum class GoalKind { RemovePart, MoveTo, PickAndPlace, LiftTogether };

inline const char* goal_kind_name(GoalKind k) {
  switch (k) {
    case GoalKind::RemovePart: return "RemovePart";
    case GoalKind::MoveTo: return "MoveTo";
    case GoalKind::PickAndPlace: return "PickAndPlace";
    case GoalKind::LiftTogether: return "LiftTogether";
  }
  return "?";
}

struct Goal {
  std::string id;
  GoalKind kind = GoalKind::MoveTo;
  int manikin = 0;
  std::string object;            // part / carried object
  std::string tool;              // optional
  std::optional<Vec3> location;  // MoveTo target / part location override
  std::optional<Vec3> place;     // PickAndPlace destination
  std::optional<Vec3> extraction;
  std::vector<int> group;        // LiftTogether participants
  std::map<std::string, double> params;
};

enum class RuleAction { Replan, Abort, InsertMovement, SwitchGoal };

struct Rule {
  int id = 0;
  int priority = 0;  // lower fires first; unique within a rule set
  std::string event_type;        // activated|succeeded|failed|disturbed|phase_change
  std::string request_kind;      // optional filter, e.g. "Reach"
  RuleAction action = RuleAction::Replan;
  std::optional<MovementRequest> insert;  // for InsertMovement
  std::string switch_goal;                // for SwitchGoal
};

/// Deterministic FSM over named states; at most one successor per
/// (state, event). States with no static emission decompose their goal on
/// entry instead.
struct BehaviorFsm {
  std::vector<std::string> states;
  std::string current;
  std::map<std::pair<std::string, std::string>, std::string> transitions;
  std::map<std::string, std::vector<MovementRequest>> emissions;
};

struct BehaviorRuntime {
  std::vector<Goal> goals;  // in execution order for this manikin
  std::vector<Rule> rules;
  BehaviorFsm fsm;
  int replans_left = 3;
  bool done = false;
};

// ------------------------------------------------------------------ events

struct Event {
  double t = 0.0;
  int manikin = -1;
  std::string type;     // activated|succeeded|failed|disturbed|phase_change
  json detail;          // structured payload
};

// ------------------------------------------------------------------- world

struct CollabGroup {
  std::string object;
  std::vector<int> manikins;
  Transform target_pose;
  VecX last_forces;   // stacked 3k per-grasp forces from the last tick
  bool active = false;
};

struct ManikinInstance {
  int id = 0;
  std::shared_ptr<const Skeleton> skeleton;
  State state;
  ManikinConfig config;
  MovementQueue queue;
  CompositorState comp;
  ActivationScratch scratch;
  BehaviorRuntime behavior;
  VecX last_tau;  // full generalized torques of the last tick (applied + constraint)
};

struct ScheduledEvent {
  double t = 0.0;
  std::string type;  // impulse|detach|move_object
  int manikin = -1;
  int hand = -1;
  VecX impulse;
  std::string object;
  Vec3 position = Vec3::Zero();
  bool applied = false;
};

struct World {
  double time = 0.0;
  long tick_index = 0;
  double dt = 1e-3;
  Vec3 gravity = Vec3(0, 0, -9.81);
  Thresholds thresholds;
  std::vector<ManikinInstance> manikins;
  std::vector<RigidObject> objects;
  std::vector<Attachment> attachments;
  std::vector<Obstacle> obstacles;
  std::vector<CollabGroup> collab_groups;
  CrowdWorld crowd;
  std::vector<ScheduledEvent> scheduled;
  std::vector<Event> events;            // full run history
  std::vector<Event> tick_events;       // batch of the current tick
  std::uint64_t seed = 0;
  long precondition_violations = 0;     // instrumentation: activations whose
                                        // pre-condition did not hold

  RigidObject* find_object(const std::string& id) {
    for (auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }
  const RigidObject* find_object(const std::string& id) const {
    for (auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }

  Attachment* find_attachment(int manikin, int hand) {
    for (auto& a : attachments)
      if (a.manikin == manikin && a.hand == hand) return &a;
    return nullptr;
  }
  const Attachment* find_attachment(int manikin, int hand) const {
    for (auto& a : attachments)
      if (a.manikin == manikin && a.hand == hand) return &a;
    return nullptr;
  }

  void log_event(int manikin, const std::string& type, json detail) {
    Event e{time, manikin, type, std::move(detail)};
    events.push_back(e);
    tick_events.push_back(std::move(e));
  }
};

/// Read-only view handed to controllers; also caches the balance quantities
/// of the manikin being ticked.
struct WorldView {
  const World* world = nullptr;
  const ManikinInstance* manikin = nullptr;
  // balance cache, valid when the manikin has feet
  std::vector<Vec2> support_hull;
  Vec2 support_centroid = Vec2::Zero();
  Vec3 com = Vec3::Zero();
  Vec2 com_velocity = Vec2::Zero();
  Vec2 extrapolated_com = Vec2::Zero();
  double support_distance = 0.0;  // signed distance of the extrapolated COM
  bool has_support = false;
};

}  // namespace manikin
