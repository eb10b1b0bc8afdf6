#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "manikin/kinematics.hpp"
#include "test_helpers.hpp"

using namespace manikin;
using manikin::testing::arm_tip_point;
using manikin::testing::make_two_link_arm;
using manikin::testing::random_config;

namespace {

Vec3 tip(const Skeleton& sk, const VecX& q) {
  return forward_kinematics(sk, q)[sk.link_idx(2)].apply(arm_tip_point());
}

/// Central finite differences of a world point, manifold-consistent.
MatX fd_point_jacobian(const Skeleton& sk, const VecX& q, int link,
                       const Vec3& point, double h) {
  MatX jac(3, sk.dof);
  for (int k = 0; k < sk.dof; ++k) {
    VecX dq = VecX::Zero(sk.dof);
    dq[k] = h;
    const Vec3 plus =
        forward_kinematics(sk, sk.integrate_positions(q, dq))[sk.link_idx(link)]
            .apply(point);
    dq[k] = -h;
    const Vec3 minus =
        forward_kinematics(sk, sk.integrate_positions(q, dq))[sk.link_idx(link)]
            .apply(point);
    jac.col(k) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

}  // namespace

TEST(Transform, ComposeAndInverse) {
  Transform a;
  a.rotation = exp_so3(Vec3(0.3, -0.2, 0.5));
  a.translation = Vec3(1, 2, 3);
  Transform b;
  b.rotation = exp_so3(Vec3(-0.1, 0.4, 0.2));
  b.translation = Vec3(-2, 0.5, 1);
  const Vec3 p(0.3, -1.0, 2.0);
  EXPECT_LT((((a * b).apply(p)) - a.apply(b.apply(p))).norm(), 1e-12);
  EXPECT_LT(((a.inverse() * a).apply(p) - p).norm(), 1e-12);
  EXPECT_LT(orthonormality_error(a.rotation), 1e-12);
}

TEST(Rotation, LogExpRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    Vec3 w = manikin::testing::random_vector(3, rng, 3.0);
    if (w.norm() > M_PI - 1e-3) w *= (M_PI - 1e-3) / w.norm();
    EXPECT_LT((log_so3(exp_so3(w)) - w).norm(), 1e-8) << "w = " << w.transpose();
  }
  // near pi
  const Vec3 w = Vec3(1.0, -0.3, 0.22).normalized() * (M_PI - 1e-8);
  EXPECT_LT((exp_so3(log_so3(exp_so3(w))) - exp_so3(w)).norm(), 1e-6);
}

TEST(LoadSkeleton, TwoLinkArm) {
  const Skeleton sk = make_two_link_arm();
  EXPECT_EQ(sk.dof, 2);
  EXPECT_EQ(sk.num_joints(), 2);
  EXPECT_FALSE(sk.free_flyer);
}

TEST(LoadSkeleton, CycleDetected) {
  // joint whose parent is its own child link
  json spec = {
      {"root_link", 0},
      {"links",
       {{{"id", 0}, {"name", "base"}},
        {{"id", 1}, {"name", "a"}},
        {{"id", 2}, {"name", "b"}}}},
      {"joints",
       {{{"id", 0}, {"parent_link", 2}, {"child_link", 1}, {"axis", {0, 0, 1}},
         {"limits", {-1, 1}}},
        {{"id", 1}, {"parent_link", 1}, {"child_link", 2}, {"axis", {0, 0, 1}},
         {"limits", {-1, 1}}}}}};
  try {
    load_skeleton(spec);
    FAIL() << "expected CycleDetected";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CycleDetected);
  }
}

TEST(LoadSkeleton, DuplicateId) {
  json spec = {{"root_link", 0},
               {"links", {{{"id", 0}}, {{"id", 0}}}},
               {"joints", json::array()}};
  try {
    load_skeleton(spec);
    FAIL() << "expected DuplicateId";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateId);
  }
}

TEST(LoadSkeleton, NonUnitAxis) {
  json spec = {{"root_link", 0},
               {"links", {{{"id", 0}}, {{"id", 1}}}},
               {"joints",
                {{{"id", 0}, {"parent_link", 0}, {"child_link", 1},
                  {"axis", {0, 0, 2}}, {"limits", {-1, 1}}}}}};
  try {
    load_skeleton(spec);
    FAIL() << "expected NonUnitAxis";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonUnitAxis);
  }
}

TEST(LoadSkeleton, InvalidLimits) {
  json spec = {{"root_link", 0},
               {"links", {{{"id", 0}}, {{"id", 1}}}},
               {"joints",
                {{{"id", 0}, {"parent_link", 0}, {"child_link", 1},
                  {"axis", {0, 0, 1}}, {"limits", {1.0, -1.0}}}}}};
  try {
    load_skeleton(spec);
    FAIL() << "expected InvalidLimits";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidLimits);
  }
}

TEST(LoadSkeleton, ReferenceHumanoidDofCount) {
  std::ifstream in(std::string(MANIKIN_DATA_DIR) + "/humanoid18.json");
  ASSERT_TRUE(in.good());
  const Skeleton sk = load_skeleton(json::parse(in));
  EXPECT_EQ(sk.num_joints(), 18);
  EXPECT_TRUE(sk.free_flyer);
  EXPECT_EQ(sk.dof, 24);
}

TEST(ForwardKinematics, TwoLinkExamples) {
  const Skeleton sk = make_two_link_arm();
  VecX q(2);
  q << 0.0, 0.0;
  EXPECT_LT((tip(sk, q) - Vec3(2, 0, 0)).norm(), 1e-12);
  q << M_PI / 2.0, 0.0;
  EXPECT_LT((tip(sk, q) - Vec3(0, 2, 0)).norm(), 1e-9);
  q << M_PI / 4.0, M_PI / 4.0;
  // x = cos q1 + cos(q1+q2), y = sin q1 + sin(q1+q2)
  EXPECT_LT((tip(sk, q) - Vec3(0.70710678118654757, 1.7071067811865475, 0)).norm(),
            1e-9);
}

TEST(ForwardKinematics, DimensionMismatch) {
  const Skeleton sk = make_two_link_arm();
  try {
    forward_kinematics(sk, VecX::Zero(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(ForwardKinematics, ChildPoseComposition) {
  const Skeleton sk = make_two_link_arm();
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const VecX q = random_config(sk, rng);
    const std::vector<Transform> poses = forward_kinematics(sk, q);
    for (int j = 0; j < sk.num_joints(); ++j) {
      const JointSpec& js = sk.joints[j];
      const int p = sk.link_index.at(js.parent_link);
      const int c = sk.link_index.at(js.child_link);
      Transform spin;
      spin.rotation = Eigen::AngleAxisd(q[j], js.axis).toRotationMatrix();
      const Transform expect =
          poses[p] * sk.links[p].child_attach * js.rest_offset * spin;
      EXPECT_LT((expect.translation - poses[c].translation).norm(), 1e-12);
      EXPECT_LT((expect.rotation - poses[c].rotation).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Jacobian, SingleLinkAtZero) {
  json spec = {{"root_link", 0},
               {"links",
                {{{"id", 0}, {"name", "base"}},
                 {{"id", 1}, {"name", "link"}, {"mass", 1.0},
                  {"com", {0.5, 0, 0}}}}},
               {"joints",
                {{{"id", 0}, {"parent_link", 0}, {"child_link", 1},
                  {"axis", {0, 0, 1}}, {"limits", {-3, 3}}}}}};
  const Skeleton sk = load_skeleton(spec);
  const MatX jac = jacobian(sk, VecX::Zero(1), 1, Vec3(1, 0, 0));
  EXPECT_LT((jac.col(0).head<3>() - Vec3(0, 1, 0)).norm(), 1e-12);
  EXPECT_LT((jac.col(0).tail<3>() - Vec3(0, 0, 1)).norm(), 1e-12);
}

TEST(Jacobian, OffChainColumnsZero) {
  const Skeleton sk = make_two_link_arm();
  std::mt19937_64 rng(5);
  const VecX q = random_config(sk, rng);
  // link1 does not move with the elbow
  const MatX jac = jacobian(sk, q, 1, Vec3(0.5, 0, 0));
  EXPECT_EQ(jac.col(1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Jacobian, MatchesFiniteDifferences) {
  const Skeleton sk = make_two_link_arm();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const VecX q = random_config(sk, rng);
    const MatX analytic = jacobian(sk, q, 2, arm_tip_point()).topRows<3>();
    const MatX fd = fd_point_jacobian(sk, q, 2, arm_tip_point(), 1e-6);
    EXPECT_LT((analytic - fd).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Jacobian, UnknownLink) {
  const Skeleton sk = make_two_link_arm();
  try {
    jacobian(sk, VecX::Zero(2), 99, Vec3::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownLink);
  }
}

TEST(CenterOfMass, Examples) {
  // single uniform link, mass 1, length 1
  json spec = {{"root_link", 0},
               {"links",
                {{{"id", 0}, {"name", "base"}},
                 {{"id", 1}, {"name", "link"}, {"mass", 1.0},
                  {"com", {0.5, 0, 0}},
                  {"child_attach", {{"translation", {1.0, 0, 0}}}}}}},
               {"joints",
                {{{"id", 0}, {"parent_link", 0}, {"child_link", 1},
                  {"axis", {0, 0, 1}}, {"limits", {-3, 3}}}}}};
  const Skeleton one = load_skeleton(spec);
  EXPECT_LT((center_of_mass(one, VecX::Zero(1)) - Vec3(0.5, 0, 0)).norm(), 1e-12);

  const Skeleton two = make_two_link_arm();
  EXPECT_LT((center_of_mass(two, VecX::Zero(2)) - Vec3(1.0, 0, 0)).norm(), 1e-12);
}

TEST(CenterOfMass, ZeroTotalMass) {
  json spec = {{"root_link", 0},
               {"links", {{{"id", 0}, {"name", "base"}}}},
               {"joints", json::array()}};
  const Skeleton sk = load_skeleton(spec);
  try {
    center_of_mass(sk, VecX::Zero(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroTotalMass);
  }
}

TEST(CenterOfMass, HumanoidMatchesBruteForce) {
  std::ifstream in(std::string(MANIKIN_DATA_DIR) + "/humanoid18.json");
  ASSERT_TRUE(in.good());
  const Skeleton sk = load_skeleton(json::parse(in));
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const VecX q = random_config(sk, rng, 0.6);
    const std::vector<Transform> poses = forward_kinematics(sk, q);
    Vec3 acc = Vec3::Zero();
    double mass = 0.0;
    for (size_t i = 0; i < sk.links.size(); ++i) {
      acc += sk.links[i].mass * poses[i].apply(sk.links[i].com_offset);
      mass += sk.links[i].mass;
    }
    EXPECT_LT((center_of_mass(sk, q) - acc / mass).norm(), 1e-12);
  }
}

TEST(Limits, ClampIdempotent) {
  const Skeleton sk = make_two_link_arm(-0.5, 0.5, 0.0, 1.0);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const VecX q = manikin::testing::random_vector(2, rng, 4.0);
    const VecX once = sk.clamp_to_limits(q);
    const VecX twice = sk.clamp_to_limits(once);
    EXPECT_EQ((once - twice).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GE(once[0], -0.5);
    EXPECT_LE(once[0], 0.5);
  }
}

TEST(Serialize, RoundTripIdentical) {
  std::ifstream in(std::string(MANIKIN_DATA_DIR) + "/humanoid18.json");
  ASSERT_TRUE(in.good());
  const Skeleton sk = load_skeleton(json::parse(in));
  const Skeleton back = load_skeleton(serialize_skeleton(sk));
  ASSERT_EQ(back.links.size(), sk.links.size());
  ASSERT_EQ(back.joints.size(), sk.joints.size());
  EXPECT_EQ(back.dof, sk.dof);
  EXPECT_EQ(back.free_flyer, sk.free_flyer);
  for (size_t i = 0; i < sk.links.size(); ++i) {
    EXPECT_EQ(back.links[i].id, sk.links[i].id);
    EXPECT_EQ(back.links[i].name, sk.links[i].name);
    EXPECT_EQ(back.links[i].mass, sk.links[i].mass);
    EXPECT_EQ((back.links[i].com_offset - sk.links[i].com_offset).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((back.links[i].inertia - sk.links[i].inertia).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((back.links[i].child_attach.translation -
               sk.links[i].child_attach.translation).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((back.links[i].child_attach.rotation -
               sk.links[i].child_attach.rotation).cwiseAbs().maxCoeff(), 0.0);
  }
  for (size_t j = 0; j < sk.joints.size(); ++j) {
    EXPECT_EQ(back.joints[j].id, sk.joints[j].id);
    EXPECT_EQ(back.joints[j].lo, sk.joints[j].lo);
    EXPECT_EQ(back.joints[j].hi, sk.joints[j].hi);
    EXPECT_EQ((back.joints[j].axis - sk.joints[j].axis).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((back.joints[j].rest_offset.translation -
               sk.joints[j].rest_offset.translation).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((back.joints[j].rest_offset.rotation -
               sk.joints[j].rest_offset.rotation).cwiseAbs().maxCoeff(), 0.0);
  }
}
