#pragma once

#include <vector>

#include "manikin/skeleton.hpp"

namespace manikin {

/// World pose of every link, indexed like sk.links.
inline std::vector<Transform> forward_kinematics(const Skeleton& sk, const VecX& q) {
  if (q.size() != sk.dof)
    throw Error(ErrorCode::DimensionMismatch,
                "forward_kinematics: q has " + std::to_string(q.size()) +
                    " entries, dof is " + std::to_string(sk.dof));
  std::vector<Transform> poses(sk.links.size());
  poses[sk.link_index.at(sk.root_link)] = sk.root_pose(q);
  for (int j : sk.topo_joints) {
    const JointSpec& js = sk.joints[j];
    const int p = sk.link_index.at(js.parent_link);
    const int c = sk.link_index.at(js.child_link);
    Transform mount = poses[p] * sk.links[p].child_attach * js.rest_offset;
    Transform spin;
    spin.rotation = Eigen::AngleAxisd(q[j], js.axis).toRotationMatrix();
    poses[c] = mount * spin;
  }
  return poses;
}

/// Joint indices on the path root -> link, root side first.
inline std::vector<int> chain_to_link(const Skeleton& sk, int link_id) {
  std::vector<int> chain;
  int cur = sk.link_idx(link_id);
  while (sk.parent_joint_of_link[cur] != -1) {
    const int j = sk.parent_joint_of_link[cur];
    chain.push_back(j);
    cur = sk.link_index.at(sk.joints[j].parent_link);
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

/// 6 x dof velocity map of the world-frame point `point_local` on `link_id`:
/// rows 0-2 linear, rows 3-5 angular.
inline MatX jacobian(const Skeleton& sk, const VecX& q, int link_id,
                     const Vec3& point_local) {
  const std::vector<Transform> poses = forward_kinematics(sk, q);
  const int li = sk.link_idx(link_id);
  const Vec3 p = poses[li].apply(point_local);

  MatX jac = MatX::Zero(6, sk.dof);
  for (int j : chain_to_link(sk, link_id)) {
    const JointSpec& js = sk.joints[j];
    const int c = sk.link_index.at(js.child_link);
    // joint origin and world axis; the child frame origin sits on the joint
    const Vec3 o = poses[c].translation;
    const Vec3 s = poses[c].rotation * js.axis;  // axis is fixed in the child frame too
    jac.block<3, 1>(0, j) = s.cross(p - o);
    jac.block<3, 1>(3, j) = s;
  }
  if (sk.free_flyer) {
    const int o6 = sk.root_dof_offset();
    const Vec3 t = poses[sk.link_index.at(sk.root_link)].translation;
    jac.block<3, 3>(0, o6).setIdentity();
    jac.block<3, 3>(0, o6 + 3) = -skew(p - t);
    jac.block<3, 3>(3, o6 + 3).setIdentity();
  }
  return jac;
}

inline double total_mass(const Skeleton& sk) {
  double m = 0.0;
  for (const LinkSpec& l : sk.links) m += l.mass;
  return m;
}

/// Mass-weighted mean of link COM positions in world frame.
inline Vec3 center_of_mass(const Skeleton& sk, const VecX& q) {
  const double m = total_mass(sk);
  if (m <= 0.0) throw Error(ErrorCode::ZeroTotalMass, "center_of_mass");
  const std::vector<Transform> poses = forward_kinematics(sk, q);
  Vec3 acc = Vec3::Zero();
  for (size_t i = 0; i < sk.links.size(); ++i)
    acc += sk.links[i].mass * poses[i].apply(sk.links[i].com_offset);
  return acc / m;
}

/// 3 x dof map from generalized velocity to COM velocity.
inline MatX com_jacobian(const Skeleton& sk, const VecX& q) {
  const double m = total_mass(sk);
  if (m <= 0.0) throw Error(ErrorCode::ZeroTotalMass, "com_jacobian");
  MatX jac = MatX::Zero(3, sk.dof);
  for (size_t i = 0; i < sk.links.size(); ++i) {
    if (sk.links[i].mass == 0.0) continue;
    jac += sk.links[i].mass *
           jacobian(sk, q, sk.links[i].id, sk.links[i].com_offset).topRows<3>();
  }
  return jac / m;
}

/// Upper bound on the distance from the first joint of `chain` (a suffix of a
/// root->link path) to the point: fixed inter-joint offsets plus point offset.
inline double chain_max_reach(const Skeleton& sk, const Vec3& point_local,
                              const std::vector<int>& chain) {
  double reach = point_local.norm();
  for (size_t k = 1; k < chain.size(); ++k) {
    const JointSpec& js = sk.joints[chain[k]];
    const int p = sk.link_index.at(js.parent_link);
    reach += (sk.links[p].child_attach * js.rest_offset).translation.norm();
  }
  return reach;
}

}  // namespace manikin
