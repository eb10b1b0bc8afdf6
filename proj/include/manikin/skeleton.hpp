#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "manikin/errors.hpp"
#include "manikin/geometry.hpp"

namespace manikin {

using json = nlohmann::json;

/// Revolute joint. rest_offset places the joint frame in the parent link,
/// after the parent's child_attach transform.
struct JointSpec {
  int id = -1;
  std::string name;
  int parent_link = -1;
  int child_link = -1;
  Vec3 axis = Vec3::UnitZ();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  Transform rest_offset;
};

struct LinkSpec {
  int id = -1;
  std::string name;
  double mass = 0.0;
  Vec3 com_offset = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();       // about the COM, in the link frame
  Transform child_attach;            // where the next joint mounts
};

/// Articulated tree. Immutable after load; q layout is joint coordinates in
/// file order, then [tx ty tz wx wy wz] for the free-flyer root (w are
/// exponential coordinates of the root rotation; the matching velocity
/// coordinates are the world-frame linear/angular velocity of the root).
struct Skeleton {
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
  int root_link = -1;
  bool free_flyer = false;

  // derived
  int dof = 0;
  std::vector<int> link_index_of_id;      // dense map via sorted ids
  std::map<int, int> link_index;          // id -> index in links
  std::map<int, int> joint_index;         // id -> index in joints
  std::vector<int> parent_joint_of_link;  // link index -> joint index (-1 root)
  std::vector<int> topo_joints;           // joint indices, parents first

  int num_joints() const { return static_cast<int>(joints.size()); }
  int root_dof_offset() const { return num_joints(); }

  int link_idx(int id) const {
    auto it = link_index.find(id);
    if (it == link_index.end())
      throw Error(ErrorCode::UnknownLink, "link id " + std::to_string(id));
    return it->second;
  }

  /// Root pose encoded in q (identity when not free-flyer).
  Transform root_pose(const VecX& q) const {
    if (!free_flyer) return Transform::Identity();
    const int o = root_dof_offset();
    Transform t;
    t.translation = q.segment<3>(o);
    t.rotation = exp_so3(q.segment<3>(o + 3));
    return t;
  }

  /// Clamp joint coordinates to limits (free-flyer coords untouched).
  VecX clamp_to_limits(const VecX& q) const {
    VecX out = q;
    for (int j = 0; j < num_joints(); ++j)
      out[j] = std::clamp(out[j], joints[j].lo, joints[j].hi);
    return out;
  }

  /// Manifold-consistent position update: additive on joints and root
  /// translation, multiplicative (world-frame) on the root rotation.
  VecX integrate_positions(const VecX& q, const VecX& dq) const {
    if (q.size() != dof || dq.size() != dof)
      throw Error(ErrorCode::DimensionMismatch, "integrate_positions");
    VecX out = q + dq;
    if (free_flyer) {
      const int o = root_dof_offset();
      const Mat3 r = exp_so3(dq.segment<3>(o + 3)) * exp_so3(q.segment<3>(o + 3));
      out.segment<3>(o + 3) = log_so3(r);
    }
    return out;
  }
};

/// Joint positions/velocities of one manikin at a point in time.
struct State {
  VecX q;
  VecX qd;
  double time = 0.0;
};

inline State make_rest_state(const Skeleton& sk) {
  State s;
  s.q = VecX::Zero(sk.dof);
  s.qd = VecX::Zero(sk.dof);
  return s;
}

namespace detail {

inline void finalize_skeleton(Skeleton& sk) {
  sk.link_index.clear();
  sk.joint_index.clear();
  for (size_t i = 0; i < sk.links.size(); ++i) {
    if (!sk.link_index.emplace(sk.links[i].id, static_cast<int>(i)).second)
      throw Error(ErrorCode::DuplicateId,
                  "link id " + std::to_string(sk.links[i].id));
  }
  for (size_t i = 0; i < sk.joints.size(); ++i) {
    if (!sk.joint_index.emplace(sk.joints[i].id, static_cast<int>(i)).second)
      throw Error(ErrorCode::DuplicateId,
                  "joint id " + std::to_string(sk.joints[i].id));
  }
  if (sk.link_index.find(sk.root_link) == sk.link_index.end())
    throw Error(ErrorCode::ValidationError,
                "root_link " + std::to_string(sk.root_link) + " not a link");

  sk.parent_joint_of_link.assign(sk.links.size(), -1);
  for (size_t j = 0; j < sk.joints.size(); ++j) {
    const JointSpec& js = sk.joints[j];
    if (std::abs(js.axis.norm() - 1.0) > 1e-6)
      throw Error(ErrorCode::NonUnitAxis, "joint " + js.name);
    if (!(js.lo <= js.hi) || !std::isfinite(js.lo) || !std::isfinite(js.hi))
      throw Error(ErrorCode::InvalidLimits, "joint " + js.name);
    auto pit = sk.link_index.find(js.parent_link);
    auto cit = sk.link_index.find(js.child_link);
    if (pit == sk.link_index.end() || cit == sk.link_index.end())
      throw Error(ErrorCode::ValidationError,
                  "joint " + js.name + " references unknown link");
    const int child = cit->second;
    if (child == sk.link_index.at(sk.root_link))
      throw Error(ErrorCode::CycleDetected,
                  "joint " + js.name + " drives the root link");
    if (sk.parent_joint_of_link[child] != -1)
      throw Error(ErrorCode::ValidationError,
                  "link " + sk.links[child].name + " has two parent joints");
    sk.parent_joint_of_link[child] = static_cast<int>(j);
  }

  // Walk to the root from every link; a walk longer than the link count is a cycle.
  for (size_t l = 0; l < sk.links.size(); ++l) {
    int cur = static_cast<int>(l);
    size_t steps = 0;
    while (sk.parent_joint_of_link[cur] != -1) {
      cur = sk.link_index.at(sk.joints[sk.parent_joint_of_link[cur]].parent_link);
      if (++steps > sk.links.size())
        throw Error(ErrorCode::CycleDetected,
                    "link " + sk.links[l].name + " is its own ancestor");
    }
    if (cur != sk.link_index.at(sk.root_link))
      throw Error(ErrorCode::ValidationError,
                  "link " + sk.links[l].name + " not connected to root");
  }

  // Topological order of joints (parent link resolved before child).
  sk.topo_joints.clear();
  std::vector<char> resolved(sk.links.size(), 0);
  resolved[sk.link_index.at(sk.root_link)] = 1;
  std::vector<char> emitted(sk.joints.size(), 0);
  bool progress = true;
  while (sk.topo_joints.size() < sk.joints.size() && progress) {
    progress = false;
    for (size_t j = 0; j < sk.joints.size(); ++j) {
      if (emitted[j]) continue;
      const int p = sk.link_index.at(sk.joints[j].parent_link);
      if (resolved[p]) {
        emitted[j] = 1;
        resolved[sk.link_index.at(sk.joints[j].child_link)] = 1;
        sk.topo_joints.push_back(static_cast<int>(j));
        progress = true;
      }
    }
  }
  if (sk.topo_joints.size() != sk.joints.size())
    throw Error(ErrorCode::CycleDetected, "joint graph is not a tree");

  for (const LinkSpec& l : sk.links) {
    if ((l.inertia - l.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw Error(ErrorCode::ValidationError,
                  "link " + l.name + " inertia not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(l.inertia);
    if (es.eigenvalues().minCoeff() < -1e-12)
      throw Error(ErrorCode::ValidationError,
                  "link " + l.name + " inertia not positive semi-definite");
    if (l.mass < 0.0)
      throw Error(ErrorCode::ValidationError, "link " + l.name + " mass < 0");
  }

  sk.dof = sk.num_joints() + (sk.free_flyer ? 6 : 0);
}

inline Vec3 parse_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::ValidationError, where + ": expected 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Mat3 parse_mat3(const json& j, const std::string& where) {
  Mat3 m;
  if (j.is_array() && j.size() == 9) {
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = j[i].get<double>();
  } else if (j.is_array() && j.size() == 3 && j[0].is_array()) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  } else if (j.is_array() && j.size() == 3 && j[0].is_number()) {
    m = Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>()).asDiagonal();
  } else {
    throw Error(ErrorCode::ValidationError,
                where + ": expected 3x3 matrix, 9 numbers or a diagonal");
  }
  return m;
}

inline Transform parse_transform(const json& j, const std::string& where) {
  Transform t;
  if (j.is_null()) return t;
  if (j.contains("translation")) t.translation = parse_vec3(j["translation"], where);
  if (j.contains("rotation")) {
    // exponential coordinates keep hand-written files compact and exactly valid
    t.rotation = exp_so3(parse_vec3(j["rotation"], where));
  } else if (j.contains("rotation_matrix")) {
    t.rotation = parse_mat3(j["rotation_matrix"], where);
    if (orthonormality_error(t.rotation) > 1e-9 || t.rotation.determinant() < 0.0)
      throw Error(ErrorCode::ValidationError, where + ": rotation not orthonormal");
  }
  return t;
}

inline json dump_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json dump_mat3(const Mat3& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  return out;
}

inline json dump_transform(const Transform& t) {
  // matrix form round-trips exactly; exp coords would pick up log/exp rounding
  return json{{"translation", dump_vec3(t.translation)},
              {"rotation_matrix", dump_mat3(t.rotation)}};
}

}  // namespace detail

/// Build a validated Skeleton from its JSON description.
inline Skeleton load_skeleton(const json& spec) {
  Skeleton sk;
  if (!spec.is_object())
    throw Error(ErrorCode::ParseError, "skeleton: expected an object");
  if (!spec.contains("links") || !spec.contains("joints"))
    throw Error(ErrorCode::ValidationError, "skeleton: missing links or joints");
  for (const json& jl : spec["links"]) {
    LinkSpec l;
    l.id = jl.at("id").get<int>();
    l.name = jl.value("name", "link" + std::to_string(l.id));
    l.mass = jl.value("mass", 0.0);
    if (jl.contains("com")) l.com_offset = detail::parse_vec3(jl["com"], l.name + ".com");
    if (jl.contains("inertia")) l.inertia = detail::parse_mat3(jl["inertia"], l.name + ".inertia");
    if (jl.contains("child_attach"))
      l.child_attach = detail::parse_transform(jl["child_attach"], l.name + ".child_attach");
    sk.links.push_back(std::move(l));
  }
  for (const json& jj : spec["joints"]) {
    JointSpec j;
    j.id = jj.at("id").get<int>();
    j.name = jj.value("name", "joint" + std::to_string(j.id));
    j.parent_link = jj.at("parent_link").get<int>();
    j.child_link = jj.at("child_link").get<int>();
    j.axis = detail::parse_vec3(jj.at("axis"), j.name + ".axis");
    if (jj.contains("limits")) {
      j.lo = jj["limits"][0].get<double>();
      j.hi = jj["limits"][1].get<double>();
    }
    if (jj.contains("rest_offset"))
      j.rest_offset = detail::parse_transform(jj["rest_offset"], j.name + ".rest_offset");
    sk.joints.push_back(std::move(j));
  }
  if (spec.contains("root_link")) {
    sk.root_link = spec["root_link"].get<int>();
  } else if (!sk.links.empty()) {
    sk.root_link = sk.links.front().id;
  }
  sk.free_flyer = spec.value("free_flyer", false);
  detail::finalize_skeleton(sk);
  return sk;
}

inline json serialize_skeleton(const Skeleton& sk) {
  json out;
  out["root_link"] = sk.root_link;
  out["free_flyer"] = sk.free_flyer;
  out["links"] = json::array();
  for (const LinkSpec& l : sk.links) {
    out["links"].push_back(json{{"id", l.id},
                                {"name", l.name},
                                {"mass", l.mass},
                                {"com", detail::dump_vec3(l.com_offset)},
                                {"inertia", detail::dump_mat3(l.inertia)},
                                {"child_attach", detail::dump_transform(l.child_attach)}});
  }
  out["joints"] = json::array();
  for (const JointSpec& j : sk.joints) {
    out["joints"].push_back(json{{"id", j.id},
                                 {"name", j.name},
                                 {"parent_link", j.parent_link},
                                 {"child_link", j.child_link},
                                 {"axis", detail::dump_vec3(j.axis)},
                                 {"limits", json::array({j.lo, j.hi})},
                                 {"rest_offset", detail::dump_transform(j.rest_offset)}});
  }
  return out;
}

}  // namespace manikin
