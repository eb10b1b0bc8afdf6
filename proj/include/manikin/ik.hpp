#pragma once

#include <Eigen/Cholesky>
#include <optional>
#include <vector>

#include "manikin/kinematics.hpp"

namespace manikin {

enum class IkStatus { Converged, MaxIters, Unreachable };

struct IkProblem {
  int end_effector_link = -1;
  Vec3 end_effector_point = Vec3::Zero();  // in the link frame
  Vec3 target = Vec3::Zero();
  std::optional<Mat3> target_rotation;     // orientation goal, optional
  double damping = 0.05;                   // lambda of the damped least squares
  double tol = 1e-4;                       // metres
  int max_iters = 200;
  double step_scale = 1.0;
  double rotation_weight = 0.5;            // metres per radian of error
  std::vector<int> active_joints;          // empty = all dof
};

struct IkResult {
  VecX q;
  IkStatus status = IkStatus::MaxIters;
  double residual = 0.0;
  int iters = 0;
};

namespace detail {

inline VecX ik_error(const Skeleton& sk, const IkProblem& prob, const VecX& q) {
  const std::vector<Transform> poses = forward_kinematics(sk, q);
  const Transform& ee = poses[sk.link_idx(prob.end_effector_link)];
  const Vec3 pos_err = prob.target - ee.apply(prob.end_effector_point);
  if (!prob.target_rotation) return pos_err;
  VecX e(6);
  e.head<3>() = pos_err;
  e.tail<3>() = prob.rotation_weight *
                log_so3(*prob.target_rotation * ee.rotation.transpose());
  return e;
}

}  // namespace detail

/// Damped-least-squares IK with joint-limit clamping and backtracking on the
/// step scale: an iteration is only accepted if it does not grow the residual.
inline IkResult solve_ik(const Skeleton& sk, const VecX& q0, const IkProblem& prob) {
  if (q0.size() != sk.dof)
    throw Error(ErrorCode::DimensionMismatch, "solve_ik: q0");

  std::vector<int> active = prob.active_joints;
  if (active.empty())
    for (int i = 0; i < sk.dof; ++i) active.push_back(i);

  const int rows = prob.target_rotation ? 6 : 3;
  const double lambda2 = prob.damping * prob.damping;

  IkResult res;
  res.q = sk.clamp_to_limits(q0);
  VecX err = detail::ik_error(sk, prob, res.q);
  double err_norm = err.norm();

  while (err_norm > prob.tol && res.iters < prob.max_iters) {
    const MatX jac_full = jacobian(sk, res.q, prob.end_effector_link,
                                   prob.end_effector_point);
    MatX jac(rows, static_cast<int>(active.size()));
    for (size_t a = 0; a < active.size(); ++a)
      jac.col(static_cast<int>(a)) = jac_full.col(active[a]).head(rows);

    MatX jjt = jac * jac.transpose();
    jjt.diagonal().array() += lambda2;
    const VecX dq_active = jac.transpose() * jjt.llt().solve(err);

    double alpha = prob.step_scale;
    bool accepted = false;
    for (int back = 0; back < 30; ++back) {
      VecX q_try = res.q;
      for (size_t a = 0; a < active.size(); ++a)
        q_try[active[a]] += alpha * dq_active[static_cast<int>(a)];
      q_try = sk.clamp_to_limits(q_try);
      const VecX err_try = detail::ik_error(sk, prob, q_try);
      if (err_try.norm() <= err_norm) {
        res.q = q_try;
        err = err_try;
        err_norm = err.norm();
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++res.iters;
    if (!accepted) break;  // stalled against limits or a singularity
  }

  res.residual = err_norm;
  if (err_norm <= prob.tol) {
    res.status = IkStatus::Converged;
    return res;
  }

  // Distinguish "ran out of iterations" from "target beyond the chain".
  std::vector<int> chain = chain_to_link(sk, prob.end_effector_link);
  std::vector<int> suffix;
  for (size_t k = 0; k < chain.size(); ++k) {
    const bool is_active =
        std::find(active.begin(), active.end(), chain[k]) != active.end();
    if (!suffix.empty() || is_active)
      suffix.push_back(chain[k]);
  }
  double reach = 0.0;
  double anchor_dist = prob.target.norm();
  if (!suffix.empty()) {
    reach = chain_max_reach(sk, prob.end_effector_point, suffix);
    const std::vector<Transform> poses = forward_kinematics(sk, res.q);
    const int first_child = sk.link_index.at(sk.joints[suffix.front()].child_link);
    anchor_dist = (prob.target - poses[first_child].translation).norm();
  }
  res.status = (anchor_dist > reach + prob.tol) ? IkStatus::Unreachable
                                                : IkStatus::MaxIters;
  return res;
}

}  // namespace manikin
