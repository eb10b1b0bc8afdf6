#pragma once

#include <Eigen/QR>

#include "manikin/kinematics.hpp"
#include "manikin/world.hpp"

namespace manikin {

struct GraspPointRef {
  int manikin = -1;
  int hand = -1;
  Vec3 attach = Vec3::Zero();  // in the object frame
};

/// The held object plus its grasp set, treated as one dynamic system. The
/// grasp matrix maps stacked point forces to the object wrench about the COM:
/// block i is [I; skew(r_i)] with r_i the world-frame lever arm of grasp i.
struct AugmentedObject {
  RigidObject object;
  std::vector<GraspPointRef> grasps;
  MatX grasp_matrix;  // 6 x 3k
};

inline AugmentedObject augment(const RigidObject& object,
                               const std::vector<GraspPointRef>& grasps) {
  if (grasps.empty())
    throw Error(ErrorCode::EmptyGraspSet, "object " + object.id);
  for (size_t i = 0; i < grasps.size(); ++i)
    for (size_t j = i + 1; j < grasps.size(); ++j)
      if (grasps[i].manikin == grasps[j].manikin &&
          grasps[i].hand == grasps[j].hand)
        throw Error(ErrorCode::DuplicateHand,
                    "hand " + std::to_string(grasps[i].hand) + " of manikin " +
                        std::to_string(grasps[i].manikin));
  AugmentedObject ao;
  ao.object = object;
  ao.grasps = grasps;
  const int k = static_cast<int>(grasps.size());
  ao.grasp_matrix = MatX::Zero(6, 3 * k);
  for (int i = 0; i < k; ++i) {
    const Vec3 lever = object.pose.rotation * grasps[i].attach;
    ao.grasp_matrix.block<3, 3>(0, 3 * i) = Mat3::Identity();
    ao.grasp_matrix.block<3, 3>(3, 3 * i) = skew(lever);
  }
  return ao;
}

struct ObjectGains {
  double kp_pos = 100.0;
  double kd_pos = 40.0;
  double kp_rot = 20.0;
  double kd_rot = 8.0;
};

/// Object-level PD with gravity compensation; the same control one would use
/// on a single manipulator. Rotation error via the log map.
inline Vec6 object_control(const AugmentedObject& ao, const Transform& target_pose,
                           const Vec6& target_twist, const ObjectGains& gains,
                           const Vec3& gravity) {
  Vec6 w;
  const Vec3 pos_err = target_pose.translation - ao.object.pose.translation;
  const Vec3 rot_err = log_so3(target_pose.rotation *
                               ao.object.pose.rotation.transpose());
  w.head<3>() = -ao.object.mass * gravity + gains.kp_pos * pos_err +
                gains.kd_pos * (target_twist.head<3>() - ao.object.twist.head<3>());
  w.tail<3>() = gains.kp_rot * rot_err +
                gains.kd_rot * (target_twist.tail<3>() - ao.object.twist.tail<3>());
  return w;
}

/// Minimum-norm force distribution f = G+ w. Point contacts carry forces
/// only, so some wrenches are unrealizable (e.g. a pure torque with one
/// grasp); those raise UnrealizableWrench. Optional per-grasp weights
/// minimize ||W^(1/2) f|| instead (strength-aware split).
inline VecX distribute_forces(const AugmentedObject& ao, const Vec6& wrench,
                              const VecX& weights = VecX(),
                              double residual_tol = 1e-9) {
  const MatX& g = ao.grasp_matrix;
  const int cols = static_cast<int>(g.cols());
  VecX f;
  if (weights.size() == 0) {
    Eigen::CompleteOrthogonalDecomposition<MatX> cod(g);
    f = cod.solve(wrench);
  } else {
    if (weights.size() != cols)
      throw Error(ErrorCode::DimensionMismatch, "distribute_forces: weights");
    const VecX inv_sqrt = weights.cwiseSqrt().cwiseInverse();
    Eigen::CompleteOrthogonalDecomposition<MatX> cod(g * inv_sqrt.asDiagonal());
    f = inv_sqrt.asDiagonal() * cod.solve(wrench).eval();
  }
  const double residual = (g * f - wrench).norm();
  if (residual > residual_tol)
    throw Error(ErrorCode::UnrealizableWrench,
                "residual " + std::to_string(residual));
  return f;
}

/// One collaborative-manipulation step for a declared group: object-level
/// control, force distribution, torque logging on each manikin (tau = J^T f),
/// and integration of the object under the applied wrench. The manikin and
/// object dynamics stay decoupled; the forces are the only coupling.
inline void collab_tick(World& world, CollabGroup& group, const ObjectGains& gains) {
  if (!group.active || group.manikins.empty()) return;
  RigidObject* obj = world.find_object(group.object);
  if (obj == nullptr) return;

  std::vector<GraspPointRef> grasps;
  for (int mid : group.manikins) {
    for (const Attachment& att : world.attachments) {
      if (att.manikin != mid || att.object != group.object) continue;
      GraspPointRef ref;
      ref.manikin = att.manikin;
      ref.hand = att.hand;
      ref.attach = obj->grasp_points.empty()
                       ? Vec3::Zero()
                       : obj->grasp_points[att.grasp_index];
      grasps.push_back(ref);
    }
  }
  if (grasps.empty()) {
    group.active = false;
    group.last_forces.resize(0);
    return;
  }

  const AugmentedObject ao = augment(*obj, grasps);
  const Vec6 wrench_desired =
      object_control(ao, group.target_pose, Vec6::Zero(), gains, world.gravity);
  VecX f;
  try {
    f = distribute_forces(ao, wrench_desired);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnrealizableWrench) throw;
    world.log_event(-1, "failed",
                    json{{"reason", "unrealizable wrench"},
                         {"object", group.object}});
    // best effort: least-squares solution even though the wrench is not met
    Eigen::CompleteOrthogonalDecomposition<MatX> cod(ao.grasp_matrix);
    f = cod.solve(wrench_desired);
  }
  group.last_forces = f;

  // each manikin logs the effort of applying its share at the hand
  for (size_t i = 0; i < grasps.size(); ++i) {
    for (ManikinInstance& m : world.manikins) {
      if (m.id != grasps[i].manikin) continue;
      const HandSpec& hs = m.config.hands[grasps[i].hand];
      const MatX jac = jacobian(*m.skeleton, m.state.q, hs.link, hs.point);
      const int nj = m.skeleton->num_joints();
      if (m.last_tau.size() == m.skeleton->dof)
        m.last_tau.head(nj) +=
            jac.topRows<3>().leftCols(nj).transpose() * f.segment<3>(3 * i);
    }
  }

  // integrate the object under the actually applied wrench
  const Vec6 wrench = ao.grasp_matrix * f;
  const Mat3 inertia_w =
      obj->pose.rotation * obj->inertia * obj->pose.rotation.transpose();
  const Vec3 accel = wrench.head<3>() / obj->mass + world.gravity;
  const Vec3 omega = obj->twist.tail<3>();
  const Vec3 ang_accel =
      inertia_w.ldlt().solve(wrench.tail<3>() - omega.cross(inertia_w * omega));
  obj->twist.head<3>() += accel * world.dt;
  obj->twist.tail<3>() += ang_accel * world.dt;
  obj->pose.translation += obj->twist.head<3>() * world.dt;
  obj->pose.rotation = exp_so3(obj->twist.tail<3>() * world.dt) * obj->pose.rotation;
}

}  // namespace manikin
