#pragma once

#include <Eigen/Cholesky>
#include <vector>

#include "manikin/kinematics.hpp"

namespace manikin {

/// Joint-space partition for the hybrid kinematic/dynamic solve: joints in
/// `prescribed` follow the given accelerations, the rest move dynamically
/// under `applied_torques` (full-length vector, read on the free indices).
struct HybridPartition {
  std::vector<int> prescribed;  // strictly increasing dof indices
  VecX prescribed_qdd;          // same length as prescribed
  VecX applied_torques;         // length dof (entries on prescribed ignored)
};

struct HybridResult {
  VecX qdd;                // full generalized acceleration
  VecX constraint_torques; // length dof; on prescribed indices: the torque the
                           // kinematic subsystem exerts, zero elsewhere
};

namespace detail {

/// Recursive Newton-Euler in world coordinates. Returns the generalized force
/// vector tau with M(q) qdd + c(q,qd) + g(q) for the given inputs; gravity is
/// the acceleration vector acting on every link.
inline VecX rnea(const Skeleton& sk, const VecX& q, const VecX& qd,
                 const VecX& qdd, const Vec3& gravity) {
  const size_t nl = sk.links.size();
  const std::vector<Transform> poses = forward_kinematics(sk, q);

  std::vector<Vec3> w(nl, Vec3::Zero());   // angular velocity
  std::vector<Vec3> v(nl, Vec3::Zero());   // velocity of the frame origin
  std::vector<Vec3> dw(nl, Vec3::Zero());  // angular acceleration
  std::vector<Vec3> dv(nl, Vec3::Zero());  // acceleration of the frame origin

  const int root = sk.link_index.at(sk.root_link);
  if (sk.free_flyer) {
    const int o = sk.root_dof_offset();
    v[root] = qd.segment<3>(o);
    w[root] = qd.segment<3>(o + 3);
    dv[root] = qdd.segment<3>(o);
    dw[root] = qdd.segment<3>(o + 3);
  }

  for (int j : sk.topo_joints) {
    const JointSpec& js = sk.joints[j];
    const int p = sk.link_index.at(js.parent_link);
    const int c = sk.link_index.at(js.child_link);
    const Vec3 r = poses[c].translation - poses[p].translation;
    const Vec3 s = poses[c].rotation * js.axis;  // world axis, fixed in parent
    const Vec3 v_mount = v[p] + w[p].cross(r);
    const Vec3 a_mount = dv[p] + dw[p].cross(r) + w[p].cross(w[p].cross(r));
    w[c] = w[p] + s * qd[j];
    dw[c] = dw[p] + s * qdd[j] + w[p].cross(s * qd[j]);
    v[c] = v_mount;
    dv[c] = a_mount;
  }

  // Net force/moment each link must receive through its joints.
  std::vector<Vec3> f(nl, Vec3::Zero());
  std::vector<Vec3> n(nl, Vec3::Zero());  // moment about the link frame origin
  for (size_t i = 0; i < nl; ++i) {
    const LinkSpec& l = sk.links[i];
    const Vec3 rc = poses[i].rotation * l.com_offset;
    const Vec3 a_com = dv[i] + dw[i].cross(rc) + w[i].cross(w[i].cross(rc));
    const Mat3 inertia_w =
        poses[i].rotation * l.inertia * poses[i].rotation.transpose();
    const Vec3 force = l.mass * (a_com - gravity);
    const Vec3 moment = inertia_w * dw[i] + w[i].cross(inertia_w * w[i]);
    f[i] = force;
    n[i] = moment + rc.cross(force);
  }

  VecX tau = VecX::Zero(sk.dof);
  for (auto it = sk.topo_joints.rbegin(); it != sk.topo_joints.rend(); ++it) {
    const JointSpec& js = sk.joints[*it];
    const int p = sk.link_index.at(js.parent_link);
    const int c = sk.link_index.at(js.child_link);
    const Vec3 s = poses[c].rotation * js.axis;
    tau[*it] = s.dot(n[c]);
    const Vec3 r = poses[c].translation - poses[p].translation;
    f[p] += f[c];
    n[p] += n[c] + r.cross(f[c]);
  }
  if (sk.free_flyer) {
    const int o = sk.root_dof_offset();
    tau.segment<3>(o) = f[root];
    tau.segment<3>(o + 3) = n[root];
  }
  return tau;
}

}  // namespace detail

/// Joint-space inertia M(q), built by running the Newton-Euler recursion on
/// unit accelerations with zero velocity and zero gravity.
inline MatX mass_matrix(const Skeleton& sk, const VecX& q) {
  if (q.size() != sk.dof)
    throw Error(ErrorCode::DimensionMismatch, "mass_matrix");
  MatX m(sk.dof, sk.dof);
  const VecX zero = VecX::Zero(sk.dof);
  for (int j = 0; j < sk.dof; ++j) {
    VecX e = VecX::Zero(sk.dof);
    e[j] = 1.0;
    m.col(j) = detail::rnea(sk, q, zero, e, Vec3::Zero());
  }
  return m;
}

/// Coriolis/centrifugal plus gravity torques c(q,qd) + g(q).
inline VecX bias_forces(const Skeleton& sk, const State& s, const Vec3& gravity) {
  return detail::rnea(sk, s.q, s.qd, VecX::Zero(sk.dof), gravity);
}

/// tau = M qdd + c + g.
inline VecX inverse_dynamics(const Skeleton& sk, const State& s, const VecX& qdd,
                             const Vec3& gravity) {
  if (s.q.size() != sk.dof || s.qd.size() != sk.dof || qdd.size() != sk.dof)
    throw Error(ErrorCode::DimensionMismatch, "inverse_dynamics");
  return detail::rnea(sk, s.q, s.qd, qdd, gravity);
}

/// Partitioned solve: prescribed joints follow their accelerations, free
/// joints obey M_DD qdd_D = tau_D - h_D - M_DK qdd_K. The coupling term
/// M_DK qdd_K carries the influence of the kinematic subsystem onto the
/// dynamic one; constraint torques are what the prescription implicitly costs.
inline HybridResult hybrid_solve(const Skeleton& sk, const State& s,
                                 const HybridPartition& part, const Vec3& gravity) {
  const int n = sk.dof;
  if (s.q.size() != n || s.qd.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "hybrid_solve: state");
  if (part.applied_torques.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "hybrid_solve: torques");
  if (static_cast<int>(part.prescribed.size()) != part.prescribed_qdd.size())
    throw Error(ErrorCode::DimensionMismatch, "hybrid_solve: prescription");
  std::vector<char> in_k(n, 0);
  for (size_t i = 0; i < part.prescribed.size(); ++i) {
    const int idx = part.prescribed[i];
    if (idx < 0 || idx >= n || in_k[idx])
      throw Error(ErrorCode::DimensionMismatch, "hybrid_solve: bad prescribed index");
    in_k[idx] = 1;
  }
  std::vector<int> free_idx;
  free_idx.reserve(n);
  for (int i = 0; i < n; ++i)
    if (!in_k[i]) free_idx.push_back(i);

  const MatX m = mass_matrix(sk, s.q);
  const VecX h = bias_forces(sk, s, gravity);

  VecX qdd = VecX::Zero(n);
  for (size_t i = 0; i < part.prescribed.size(); ++i)
    qdd[part.prescribed[i]] = part.prescribed_qdd[i];

  const int nd = static_cast<int>(free_idx.size());
  if (nd > 0) {
    MatX m_dd(nd, nd);
    VecX rhs(nd);
    for (int a = 0; a < nd; ++a) {
      const int ia = free_idx[a];
      for (int b = 0; b < nd; ++b) m_dd(a, b) = m(ia, free_idx[b]);
      double coupling = 0.0;
      for (size_t k = 0; k < part.prescribed.size(); ++k)
        coupling += m(ia, part.prescribed[k]) * part.prescribed_qdd[k];
      rhs[a] = part.applied_torques[ia] - h[ia] - coupling;
    }
    Eigen::LLT<MatX> llt(m_dd);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::SingularMass, "hybrid_solve: M_DD not SPD");
    const VecX qdd_d = llt.solve(rhs);
    for (int a = 0; a < nd; ++a) qdd[free_idx[a]] = qdd_d[a];
  }

  VecX constraint = VecX::Zero(n);
  for (int k : part.prescribed) constraint[k] = m.row(k).dot(qdd) + h[k];
  return HybridResult{qdd, constraint};
}

/// qdd = M^-1 (tau - c - g), via the hybrid solve with nothing prescribed.
inline VecX forward_dynamics(const Skeleton& sk, const State& s, const VecX& tau,
                             const Vec3& gravity) {
  if (tau.size() != sk.dof)
    throw Error(ErrorCode::DimensionMismatch, "forward_dynamics");
  HybridPartition part;
  part.prescribed_qdd = VecX::Zero(0);
  part.applied_torques = tau;
  return hybrid_solve(sk, s, part, gravity).qdd;
}

/// Semi-implicit Euler with hard joint-limit clamps (velocity zeroed at a
/// clamped joint).
inline State step(const Skeleton& sk, const State& s, const VecX& qdd, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::NonPositiveDt, "step");
  if (s.q.size() != sk.dof || s.qd.size() != sk.dof || qdd.size() != sk.dof)
    throw Error(ErrorCode::DimensionMismatch, "step");
  State out;
  out.qd = s.qd + qdd * dt;
  out.q = sk.integrate_positions(s.q, out.qd * dt);
  for (int j = 0; j < sk.num_joints(); ++j) {
    const JointSpec& js = sk.joints[j];
    if (out.q[j] < js.lo) {
      out.q[j] = js.lo;
      out.qd[j] = 0.0;
    } else if (out.q[j] > js.hi) {
      out.q[j] = js.hi;
      out.qd[j] = 0.0;
    }
  }
  out.time = s.time + dt;
  return out;
}

inline double kinetic_energy(const Skeleton& sk, const State& s) {
  return 0.5 * s.qd.dot(mass_matrix(sk, s.q) * s.qd);
}

/// Gravitational potential, zero at world origin height.
inline double potential_energy(const Skeleton& sk, const VecX& q, const Vec3& gravity) {
  const std::vector<Transform> poses = forward_kinematics(sk, q);
  double e = 0.0;
  for (size_t i = 0; i < sk.links.size(); ++i)
    e -= sk.links[i].mass * gravity.dot(poses[i].apply(sk.links[i].com_offset));
  return e;
}

inline double mechanical_energy(const Skeleton& sk, const State& s, const Vec3& gravity) {
  return kinetic_energy(sk, s) + potential_energy(sk, s.q, gravity);
}

}  // namespace manikin
