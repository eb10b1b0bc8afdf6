#pragma once

#include <random>

#include "manikin/skeleton.hpp"

namespace manikin::testing {

/// Planar 2R arm in the x-y plane: two unit links rotating about z, tip at
/// (1,0,0) in the last link frame. Limits wide unless given.
inline Skeleton make_two_link_arm(double lo1 = -3.1, double hi1 = 3.1,
                                  double lo2 = -3.1, double hi2 = 3.1) {
  json spec = {
      {"root_link", 0},
      {"free_flyer", false},
      {"links",
       {{{"id", 0}, {"name", "base"}, {"mass", 0.0}},
        {{"id", 1},
         {"name", "link1"},
         {"mass", 1.0},
         {"com", {0.5, 0.0, 0.0}},
         {"inertia", {0.0, 0.0, 0.0}},
         {"child_attach", {{"translation", {1.0, 0.0, 0.0}}}}},
        {{"id", 2},
         {"name", "link2"},
         {"mass", 1.0},
         {"com", {0.5, 0.0, 0.0}},
         {"inertia", {0.0, 0.0, 0.0}},
         {"child_attach", {{"translation", {1.0, 0.0, 0.0}}}}}}},
      {"joints",
       {{{"id", 0},
         {"name", "shoulder"},
         {"parent_link", 0},
         {"child_link", 1},
         {"axis", {0.0, 0.0, 1.0}},
         {"limits", {lo1, hi1}}},
        {{"id", 1},
         {"name", "elbow"},
         {"parent_link", 1},
         {"child_link", 2},
         {"axis", {0.0, 0.0, 1.0}},
         {"limits", {lo2, hi2}}}}}};
  return load_skeleton(spec);
}

inline Vec3 arm_tip_point() { return Vec3(1.0, 0.0, 0.0); }

/// Point-mass pendulum links (mass at the far end), gravity along -y.
/// Single: make_pendulum(1); double: make_pendulum(2).
inline Skeleton make_pendulum(int links, double mass = 1.0, double length = 1.0) {
  json spec;
  spec["root_link"] = 0;
  spec["free_flyer"] = false;
  spec["links"] = json::array();
  spec["links"].push_back({{"id", 0}, {"name", "base"}, {"mass", 0.0}});
  spec["joints"] = json::array();
  for (int i = 1; i <= links; ++i) {
    spec["links"].push_back(
        {{"id", i},
         {"name", "bob" + std::to_string(i)},
         {"mass", mass},
         {"com", {length, 0.0, 0.0}},
         {"inertia", {0.0, 0.0, 0.0}},
         {"child_attach", {{"translation", {length, 0.0, 0.0}}}}});
    spec["joints"].push_back({{"id", i - 1},
                              {"name", "pivot" + std::to_string(i)},
                              {"parent_link", i - 1},
                              {"child_link", i},
                              {"axis", {0.0, 0.0, 1.0}},
                              {"limits", {-100.0, 100.0}}});
  }
  return load_skeleton(spec);
}

inline Vec3 pendulum_gravity() { return Vec3(0.0, -9.81, 0.0); }

inline VecX random_config(const Skeleton& sk, std::mt19937_64& rng, double span = 1.5) {
  VecX q = VecX::Zero(sk.dof);
  auto uni = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  for (int j = 0; j < sk.num_joints(); ++j) {
    const double lo = std::max(sk.joints[j].lo, -span);
    const double hi = std::min(sk.joints[j].hi, span);
    q[j] = uni(lo, hi);
  }
  if (sk.free_flyer) {
    const int o = sk.root_dof_offset();
    for (int k = 0; k < 3; ++k) q[o + k] = uni(-0.5, 0.5);
    for (int k = 3; k < 6; ++k) q[o + k] = uni(-1.0, 1.0);
  }
  return q;
}

inline VecX random_vector(int n, std::mt19937_64& rng, double span = 1.0) {
  VecX v(n);
  for (int i = 0; i < n; ++i)
    v[i] = -span + 2.0 * span * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  return v;
}

}  // namespace manikin::testing
