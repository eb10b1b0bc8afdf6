#pragma once

#include <memory>

#include "manikin/dynamics.hpp"
#include "manikin/ik.hpp"
#include "manikin/world.hpp"

namespace manikin {

// ------------------------------------------------------------ balance view

/// Fill the balance cache of a view: support hull from the foot rectangles,
/// COM, and the velocity-extrapolated COM (so an impulse registers the tick
/// it is injected). support_distance is the signed distance of the
/// extrapolated COM to the hull: negative inside.
inline WorldView make_world_view(const World& world, const ManikinInstance& m) {
  WorldView view;
  view.world = &world;
  view.manikin = &m;
  if (m.config.feet.empty()) return view;

  const Skeleton& sk = *m.skeleton;
  const std::vector<Transform> poses = forward_kinematics(sk, m.state.q);
  std::vector<Vec2> pts;
  for (const FootSpec& foot : m.config.feet) {
    const Transform& pose = poses[sk.link_idx(foot.link)];
    for (const Vec3& c : foot.corners) {
      const Vec3 w = pose.apply(c);
      pts.emplace_back(w.x(), w.y());
    }
  }
  view.support_hull = convex_hull(pts);
  view.support_centroid = polygon_centroid(view.support_hull);
  view.com = center_of_mass(sk, m.state.q);
  const Vec3 com_vel = com_jacobian(sk, m.state.q) * m.state.qd;
  view.com_velocity = Vec2(com_vel.x(), com_vel.y());
  const double g = std::max(std::abs(world.gravity.z()), 1e-6);
  const double omega_inv = std::sqrt(std::max(view.com.z(), 0.05) / g);
  view.extrapolated_com =
      Vec2(view.com.x(), view.com.y()) + omega_inv * view.com_velocity;
  view.support_distance = signed_distance(view.extrapolated_com, view.support_hull);
  view.has_support = view.support_hull.size() >= 3;
  return view;
}

inline bool balance_ok(const WorldView& view) {
  return !view.has_support || view.support_distance <= 0.0;
}

inline bool balance_recoverable(const WorldView& view) {
  return view.has_support &&
         view.support_distance <= view.world->thresholds.recover_band;
}

// ------------------------------------------------------------------ output

enum class ControllerMode { Kinematic, Dynamic, Hybrid };
enum class ControllerStatus { Running, Succeeded, Failed };

struct PrescribedAccel {
  int index = 0;
  double qdd = 0.0;
};

struct AttachChange {
  bool attach = true;
  int hand = 0;
  std::string object;
  int grasp_index = 0;
};

struct ControllerOutput {
  std::optional<VecX> torques;            // absent for kinematic controllers
  std::vector<PrescribedAccel> prescribed;  // ascending index; absent for dynamic
  std::vector<AttachChange> attachments;
  ControllerStatus status = ControllerStatus::Running;
};

// -------------------------------------------------------------- controller

/// A low-level controller: a black box with a pre-condition (states it can
/// start from), a post-condition (its success region), and a performance
/// estimate used by the compositor to pick "the best" eligible controller.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual int id() const = 0;
  virtual const char* name() const = 0;
  virtual ControllerMode mode() const = 0;
  virtual bool universal() const { return false; }
  virtual bool handles(MovementKind kind) const = 0;
  virtual bool pre_condition(const State& s, const WorldView& w,
                             const MovementRequest& r) const = 0;
  virtual bool post_condition(const State& s, const WorldView& w,
                              const MovementRequest& r) const = 0;
  virtual double performance(const State& s, const WorldView& w,
                             const MovementRequest& r) const = 0;
  virtual ControllerOutput step(const State& s, const WorldView& w,
                                const MovementRequest& r,
                                ActivationScratch& scratch) const = 0;
};

using ControllerCatalog = std::vector<std::unique_ptr<Controller>>;

namespace detail {

inline int resolve_hand(const ManikinInstance& m, const std::string& name) {
  if (m.config.hands.empty())
    throw Error(ErrorCode::UnknownHand, "manikin has no hands");
  if (name.empty()) return 0;
  for (size_t i = 0; i < m.config.hands.size(); ++i)
    if (m.config.hands[i].name == name) return static_cast<int>(i);
  throw Error(ErrorCode::UnknownHand, name);
}

inline Vec3 hand_world(const ManikinInstance& m, int hand) {
  const HandSpec& h = m.config.hands[hand];
  const std::vector<Transform> poses = forward_kinematics(*m.skeleton, m.state.q);
  return poses[m.skeleton->link_idx(h.link)].apply(h.point);
}

/// World position of a grasp point on an object, and which point is nearest
/// to the given hand position.
inline int nearest_grasp_index(const RigidObject& obj, const Vec3& hand_pos) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < obj.grasp_points.size(); ++i) {
    const double d = (obj.pose.apply(obj.grasp_points[i]) - hand_pos).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

/// Dead-beat prescription tracking q_des under semi-implicit Euler:
/// qd' = (q_des - q)/dt, q' = q_des.
inline void prescribe_track(std::vector<PrescribedAccel>& out, const State& s,
                            int index, double q_des, double dt) {
  const double qdd = ((q_des - s.q[index]) / dt - s.qd[index]) / dt;
  out.push_back({index, qdd});
}

/// Hold a set of joints at q_hold, approaching at most `speed` rad/s.
inline void prescribe_hold(std::vector<PrescribedAccel>& out, const State& s,
                           const VecX& q_hold, const std::vector<int>& joints,
                           double speed, double dt) {
  for (int j : joints) {
    const double delta =
        std::clamp(q_hold[j] - s.q[j], -speed * dt, speed * dt);
    prescribe_track(out, s, j, s.q[j] + delta, dt);
  }
}

}  // namespace detail

// ------------------------------------------------------- posture controller

/// Dynamic PD toward the stored default posture.
class PostureController : public Controller {
 public:
  int id() const override { return 0; }
  const char* name() const override { return "posture"; }
  ControllerMode mode() const override { return ControllerMode::Dynamic; }
  bool handles(MovementKind k) const override {
    return k == MovementKind::HoldPosture;
  }

  bool pre_condition(const State&, const WorldView& w,
                     const MovementRequest&) const override {
    return balance_ok(w);
  }

  bool post_condition(const State& s, const WorldView& w,
                      const MovementRequest& r) const override {
    const ManikinInstance& m = *w.manikin;
    const int nj = m.skeleton->num_joints();
    const Thresholds& th = w.world->thresholds;
    const bool settled =
        (s.q.head(nj) - m.config.q_default.head(nj)).cwiseAbs().maxCoeff() <
            th.posture_tol_q &&
        s.qd.head(nj).cwiseAbs().maxCoeff() < th.posture_tol_qd;
    auto it = r.params.find("duration");
    if (it == r.params.end()) return settled;
    return settled &&
           static_cast<double>(w.manikin->comp.ticks_active) * w.world->dt >=
               it->second;
  }

  double performance(const State& s, const WorldView& w,
                     const MovementRequest&) const override {
    const int nj = w.manikin->skeleton->num_joints();
    const double dq =
        (s.q.head(nj) - w.manikin->config.q_default.head(nj)).cwiseAbs().maxCoeff();
    const Thresholds& th = w.world->thresholds;
    return th.perf_time_weight * dq + th.perf_energy_weight * dq;
  }

  ControllerOutput step(const State& s, const WorldView& w,
                        const MovementRequest& r,
                        ActivationScratch&) const override {
    const ManikinInstance& m = *w.manikin;
    const int nj = m.skeleton->num_joints();
    ControllerOutput out;
    VecX tau = VecX::Zero(m.skeleton->dof);
    tau.head(nj) = m.config.kp.cwiseProduct(m.config.q_default.head(nj) - s.q.head(nj)) -
                   m.config.kd.cwiseProduct(s.qd.head(nj));
    out.torques = tau;
    out.status = post_condition(s, w, r) ? ControllerStatus::Succeeded
                                         : ControllerStatus::Running;
    return out;
  }
};

// --------------------------------------------------------- reach controller

/// Kinematic reach: one clamped damped-least-squares step per tick along the
/// hand chain, emitted as prescribed accelerations; the rest of the body
/// holds its activation posture.
class ReachController : public Controller {
 public:
  int id() const override { return 1; }
  const char* name() const override { return "reach"; }
  ControllerMode mode() const override { return ControllerMode::Kinematic; }
  bool handles(MovementKind k) const override { return k == MovementKind::Reach; }

  bool pre_condition(const State& s, const WorldView& w,
                     const MovementRequest& r) const override {
    if (!r.target) return false;
    if (!balance_ok(w)) return false;
    return within_envelope(s, w, r);
  }

  bool post_condition(const State&, const WorldView& w,
                      const MovementRequest& r) const override {
    if (!r.target) return false;
    const int hand = detail::resolve_hand(*w.manikin, r.hand);
    return (detail::hand_world(*w.manikin, hand) - *r.target).norm() <
           w.world->thresholds.reach_success;
  }

  double performance(const State&, const WorldView& w,
                     const MovementRequest& r) const override {
    const int hand = detail::resolve_hand(*w.manikin, r.hand);
    const double d = (detail::hand_world(*w.manikin, hand) - *r.target).norm();
    const Thresholds& th = w.world->thresholds;
    return th.perf_time_weight * d / th.hand_speed + th.perf_energy_weight * d;
  }

  ControllerOutput step(const State& s, const WorldView& w,
                        const MovementRequest& r,
                        ActivationScratch& scratch) const override {
    const ManikinInstance& m = *w.manikin;
    const Skeleton& sk = *m.skeleton;
    const Thresholds& th = w.world->thresholds;
    const double dt = w.world->dt;
    ControllerOutput out;

    if (post_condition(s, w, r)) {
      out.status = ControllerStatus::Succeeded;
      hold_all(out, s, w, scratch, dt);
      return out;
    }
    if (!within_envelope(s, w, r)) {
      out.status = ControllerStatus::Failed;
      return out;
    }

    const int hand = detail::resolve_hand(m, r.hand);
    const HandSpec& hs = m.config.hands[hand];
    IkProblem prob;
    prob.end_effector_link = hs.link;
    prob.end_effector_point = hs.point;
    prob.target = *r.target;
    prob.tol = 0.5 * th.reach_success;
    prob.max_iters = 1;
    prob.active_joints = chain_to_link(sk, hs.link);
    const IkResult ik = solve_ik(sk, s.q, prob);

    std::vector<char> on_chain(sk.dof, 0);
    for (int j : prob.active_joints) on_chain[j] = 1;
    for (int j : prob.active_joints) {
      const double delta = std::clamp(ik.q[j] - s.q[j],
                                      -th.reach_joint_speed * dt,
                                      th.reach_joint_speed * dt);
      detail::prescribe_track(out.prescribed, s, j, s.q[j] + delta, dt);
    }
    std::vector<int> rest;
    for (int j = 0; j < sk.num_joints(); ++j)
      if (!on_chain[j]) rest.push_back(j);
    detail::prescribe_hold(out.prescribed, s, scratch.q_hold, rest,
                           th.reach_joint_speed, dt);
    std::sort(out.prescribed.begin(), out.prescribed.end(),
              [](const PrescribedAccel& a, const PrescribedAccel& b) {
                return a.index < b.index;
              });
    out.status = ControllerStatus::Running;
    return out;
  }

 private:
  bool within_envelope(const State& s, const WorldView& w,
                       const MovementRequest& r) const {
    const ManikinInstance& m = *w.manikin;
    const Skeleton& sk = *m.skeleton;
    const int hand = detail::resolve_hand(m, r.hand);
    const HandSpec& hs = m.config.hands[hand];
    const std::vector<int> chain = chain_to_link(sk, hs.link);
    if (chain.empty()) return false;
    const double reach = chain_max_reach(sk, hs.point, chain);
    const std::vector<Transform> poses = forward_kinematics(sk, s.q);
    const Vec3 anchor =
        poses[sk.link_index.at(sk.joints[chain.front()].child_link)].translation;
    return (*r.target - anchor).norm() <= reach;
  }

  void hold_all(ControllerOutput& out, const State& s, const WorldView& w,
                const ActivationScratch& scratch, double dt) const {
    std::vector<int> joints;
    for (int j = 0; j < w.manikin->skeleton->num_joints(); ++j) joints.push_back(j);
    detail::prescribe_hold(out.prescribed, s, scratch.q_hold, joints,
                           w.world->thresholds.reach_joint_speed, dt);
  }
};

// ------------------------------------------------------- balance controller

/// Dynamic recovery: Jacobian-transpose COM control toward the support
/// centroid, plus light posture regularization.
class BalanceController : public Controller {
 public:
  int id() const override { return 2; }
  const char* name() const override { return "balance"; }
  ControllerMode mode() const override { return ControllerMode::Dynamic; }
  bool handles(MovementKind k) const override {
    return k == MovementKind::RecoverBalance;
  }

  bool pre_condition(const State&, const WorldView& w,
                     const MovementRequest&) const override {
    return balance_recoverable(w);
  }

  bool post_condition(const State& s, const WorldView& w,
                      const MovementRequest&) const override {
    if (!w.has_support) return false;
    const Thresholds& th = w.world->thresholds;
    const int nj = w.manikin->skeleton->num_joints();
    return w.support_distance <= -th.balance_margin &&
           s.qd.head(nj).cwiseAbs().maxCoeff() < th.balance_qd_tol;
  }

  double performance(const State&, const WorldView& w,
                     const MovementRequest&) const override {
    const double excess = std::max(w.support_distance, 0.0);
    const Thresholds& th = w.world->thresholds;
    return th.perf_time_weight * excess / 0.05 + th.perf_energy_weight * excess;
  }

  ControllerOutput step(const State& s, const WorldView& w,
                        const MovementRequest& r,
                        ActivationScratch& scratch) const override {
    const ManikinInstance& m = *w.manikin;
    const Skeleton& sk = *m.skeleton;
    const int nj = sk.num_joints();
    ControllerOutput out;
    if (post_condition(s, w, r)) {
      out.status = ControllerStatus::Succeeded;
      out.torques = VecX::Zero(sk.dof);
      return out;
    }
    if (!balance_recoverable(w)) {
      out.status = ControllerStatus::Failed;
      return out;
    }
    const Vec2 err = w.support_centroid - w.extrapolated_com;
    const Vec2 f = kp_com_ * err - kd_com_ * w.com_velocity;
    const MatX jc = com_jacobian(sk, s.q);
    VecX tau = VecX::Zero(sk.dof);
    tau.head(nj) = jc.topRows<2>().leftCols(nj).transpose() * f;
    tau.head(nj) += 0.25 * m.config.kp.cwiseProduct(scratch.q_hold.head(nj) - s.q.head(nj)) -
                    m.config.kd.cwiseProduct(s.qd.head(nj));
    out.torques = tau;
    out.status = ControllerStatus::Running;
    return out;
  }

 private:
  double kp_com_ = 900.0;
  double kd_com_ = 350.0;
};

// ----------------------------------------------------------- fall controller

/// Protective collapse: damping proportional to the diagonal inertia, always
/// eligible. The root is released by the compositor while this runs.
class FallController : public Controller {
 public:
  int id() const override { return 3; }
  const char* name() const override { return "fall"; }
  ControllerMode mode() const override { return ControllerMode::Dynamic; }
  bool universal() const override { return true; }
  bool handles(MovementKind k) const override { return k == MovementKind::Fall; }

  bool pre_condition(const State&, const WorldView&,
                     const MovementRequest&) const override {
    return true;
  }

  bool post_condition(const State& s, const WorldView& w,
                      const MovementRequest&) const override {
    const Skeleton& sk = *w.manikin->skeleton;
    const Thresholds& th = w.world->thresholds;
    const double root_z =
        sk.free_flyer ? s.q[sk.root_dof_offset() + 2] : 0.0;
    return root_z < th.fallen_root_z &&
           s.qd.cwiseAbs().maxCoeff() < th.fall_qd_tol;
  }

  double performance(const State&, const WorldView&,
                     const MovementRequest&) const override {
    return 1.0;
  }

  ControllerOutput step(const State& s, const WorldView& w,
                        const MovementRequest& r,
                        ActivationScratch&) const override {
    ControllerOutput out;
    if (post_condition(s, w, r)) {
      out.status = ControllerStatus::Succeeded;
      out.torques = VecX::Zero(w.manikin->skeleton->dof);
      return out;
    }
    out.torques = damping_torques(*w.manikin->skeleton, s,
                                  w.world->thresholds.fall_damping);
    out.status = ControllerStatus::Running;
    return out;
  }

  static VecX damping_torques(const Skeleton& sk, const State& s, double scale) {
    const VecX diag = mass_matrix(sk, s.q).diagonal();
    return -scale * diag.cwiseProduct(s.qd);
  }
};

// ----------------------------------------------------------- walk controller

/// Root-motion locomotion stub: the root glides toward the target at a fixed
/// speed with a canned leg-swing pattern; not a physical gait.
class WalkController : public Controller {
 public:
  int id() const override { return 4; }
  const char* name() const override { return "walk"; }
  ControllerMode mode() const override { return ControllerMode::Kinematic; }
  bool handles(MovementKind k) const override { return k == MovementKind::WalkTo; }

  bool pre_condition(const State& s, const WorldView& w,
                     const MovementRequest& r) const override {
    if (!r.target || !w.manikin->skeleton->free_flyer) return false;
    if (!balance_ok(w)) return false;
    return path_clear(s, w, r);
  }

  bool post_condition(const State& s, const WorldView& w,
                      const MovementRequest& r) const override {
    if (!r.target) return false;
    const Skeleton& sk = *w.manikin->skeleton;
    const int o = sk.root_dof_offset();
    const Vec2 root(s.q[o], s.q[o + 1]);
    return (Vec2(r.target->x(), r.target->y()) - root).norm() <
           w.world->thresholds.walk_success;
  }

  double performance(const State& s, const WorldView& w,
                     const MovementRequest& r) const override {
    const Skeleton& sk = *w.manikin->skeleton;
    const int o = sk.root_dof_offset();
    const double d =
        (Vec2(r.target->x(), r.target->y()) - Vec2(s.q[o], s.q[o + 1])).norm();
    const Thresholds& th = w.world->thresholds;
    return th.perf_time_weight * d / th.walk_speed + th.perf_energy_weight * d;
  }

  ControllerOutput step(const State& s, const WorldView& w,
                        const MovementRequest& r,
                        ActivationScratch& scratch) const override {
    const Skeleton& sk = *w.manikin->skeleton;
    const Thresholds& th = w.world->thresholds;
    const double dt = w.world->dt;
    const int o = sk.root_dof_offset();
    ControllerOutput out;
    if (post_condition(s, w, r)) {
      out.status = ControllerStatus::Succeeded;
      return out;
    }
    if (!path_clear(s, w, r)) {
      out.status = ControllerStatus::Failed;
      return out;
    }

    const Vec2 root(s.q[o], s.q[o + 1]);
    const Vec2 to_target = Vec2(r.target->x(), r.target->y()) - root;
    const double d = to_target.norm();
    const double speed = std::min(th.walk_speed, d / dt);
    const Vec2 v = to_target / std::max(d, 1e-12) * speed;
    // dead-beat velocity tracking on the horizontal root
    out.prescribed.push_back({o, (v.x() - s.qd[o]) / dt});
    out.prescribed.push_back({o + 1, (v.y() - s.qd[o + 1]) / dt});
    detail::prescribe_track(out.prescribed, s, o + 2, scratch.q_hold[o + 2], dt);
    for (int k = 3; k < 6; ++k)
      detail::prescribe_track(out.prescribed, s, o + k, scratch.q_hold[o + k], dt);

    scratch.gait_phase += dt * 2.0 * M_PI * th.walk_speed / 0.6;  // 0.6 m stride
    std::vector<char> handled(sk.num_joints(), 0);
    for (const GaitJoint& gj : w.manikin->config.gait) {
      if (gj.joint >= sk.num_joints()) continue;
      const double q_des = scratch.q_hold[gj.joint] +
                           gj.scale * th.gait_amplitude *
                               std::sin(scratch.gait_phase + gj.phase);
      detail::prescribe_track(out.prescribed, s, gj.joint, q_des, dt);
      handled[gj.joint] = 1;
    }
    std::vector<int> rest;
    for (int j = 0; j < sk.num_joints(); ++j)
      if (!handled[j]) rest.push_back(j);
    detail::prescribe_hold(out.prescribed, s, scratch.q_hold, rest,
                           th.reach_joint_speed, dt);
    std::sort(out.prescribed.begin(), out.prescribed.end(),
              [](const PrescribedAccel& a, const PrescribedAccel& b) {
                return a.index < b.index;
              });
    out.status = ControllerStatus::Running;
    return out;
  }

 private:
  bool path_clear(const State& s, const WorldView& w,
                  const MovementRequest& r) const {
    const Skeleton& sk = *w.manikin->skeleton;
    const int o = sk.root_dof_offset();
    const Vec2 a(s.q[o], s.q[o + 1]);
    const Vec2 b(r.target->x(), r.target->y());
    for (const Obstacle& ob : w.world->obstacles)
      if (point_segment_distance(ob.center, a, b) <= ob.radius + 0.25)
        return false;
    return true;
  }
};

// ---------------------------------------------------------- grasp controller

/// Attach/detach events: a grasp is a rigid weld of the object frame to the
/// hand frame, applied by the harness.
class GraspController : public Controller {
 public:
  int id() const override { return 5; }
  const char* name() const override { return "grasp"; }
  ControllerMode mode() const override { return ControllerMode::Kinematic; }
  bool handles(MovementKind k) const override {
    return k == MovementKind::Grasp || k == MovementKind::Release;
  }

  bool pre_condition(const State&, const WorldView& w,
                     const MovementRequest& r) const override {
    const ManikinInstance& m = *w.manikin;
    int hand = -1;
    try {
      hand = detail::resolve_hand(m, r.hand);
    } catch (const Error&) {
      return false;
    }
    if (r.kind == MovementKind::Release)
      return w.world->find_attachment(m.id, hand) != nullptr;
    if (w.world->find_attachment(m.id, hand) != nullptr) return false;
    const RigidObject* obj = w.world->find_object(r.object);
    if (obj == nullptr || obj->grasp_points.empty()) return false;
    const Vec3 hp = detail::hand_world(m, hand);
    const int gi = detail::nearest_grasp_index(*obj, hp);
    return (obj->pose.apply(obj->grasp_points[gi]) - hp).norm() <=
           w.world->thresholds.grasp_distance;
  }

  bool post_condition(const State&, const WorldView& w,
                      const MovementRequest& r) const override {
    const int hand = detail::resolve_hand(*w.manikin, r.hand);
    const bool attached = w.world->find_attachment(w.manikin->id, hand) != nullptr;
    return r.kind == MovementKind::Grasp ? attached : !attached;
  }

  double performance(const State&, const WorldView&,
                     const MovementRequest&) const override {
    return 0.1;
  }

  ControllerOutput step(const State& s, const WorldView& w,
                        const MovementRequest& r,
                        ActivationScratch& scratch) const override {
    const ManikinInstance& m = *w.manikin;
    const int hand = detail::resolve_hand(m, r.hand);
    ControllerOutput out;
    std::vector<int> joints;
    for (int j = 0; j < m.skeleton->num_joints(); ++j) joints.push_back(j);
    detail::prescribe_hold(out.prescribed, s, scratch.q_hold, joints,
                           w.world->thresholds.reach_joint_speed, w.world->dt);

    if (r.kind == MovementKind::Grasp) {
      const RigidObject* obj = w.world->find_object(r.object);
      if (obj == nullptr) {
        out.status = ControllerStatus::Failed;
        return out;
      }
      const int gi = detail::nearest_grasp_index(*obj, detail::hand_world(m, hand));
      out.attachments.push_back({true, hand, r.object, gi});
    } else {
      const Attachment* att = w.world->find_attachment(m.id, hand);
      if (att == nullptr) {
        out.status = ControllerStatus::Failed;
        return out;
      }
      out.attachments.push_back({false, hand, att->object, att->grasp_index});
    }
    out.status = ControllerStatus::Succeeded;
    return out;
  }
};

// ------------------------------------------------------------------ catalog

inline ControllerCatalog make_default_catalog() {
  ControllerCatalog catalog;
  catalog.push_back(std::make_unique<PostureController>());
  catalog.push_back(std::make_unique<ReachController>());
  catalog.push_back(std::make_unique<BalanceController>());
  catalog.push_back(std::make_unique<FallController>());
  catalog.push_back(std::make_unique<WalkController>());
  catalog.push_back(std::make_unique<GraspController>());
  return catalog;
}

inline const Controller* find_controller(const ControllerCatalog& catalog, int id) {
  for (const auto& c : catalog)
    if (c->id() == id) return c.get();
  return nullptr;
}

}  // namespace manikin
