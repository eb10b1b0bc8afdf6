#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "manikin/dynamics.hpp"
#include "manikin/ik.hpp"
#include "test_helpers.hpp"

using namespace manikin;
using manikin::testing::arm_tip_point;
using manikin::testing::make_pendulum;
using manikin::testing::make_two_link_arm;
using manikin::testing::pendulum_gravity;
using manikin::testing::random_config;
using manikin::testing::random_vector;

namespace {

Vec3 arm_tip(const Skeleton& sk, const VecX& q) {
  return forward_kinematics(sk, q)[sk.link_idx(2)].apply(arm_tip_point());
}

/// Analytic 2R inverse kinematics (law of cosines), elbow-down branch.
VecX analytic_2r(const Vec3& target) {
  const double r2 = target.x() * target.x() + target.y() * target.y();
  const double c2 = std::clamp((r2 - 2.0) / 2.0, -1.0, 1.0);
  const double q2 = std::acos(c2);
  const double q1 = std::atan2(target.y(), target.x()) -
                    std::atan2(std::sin(q2), 1.0 + std::cos(q2));
  VecX q(2);
  q << q1, q2;
  return q;
}

/// Kinetic energy summed link by link through Jacobians; independent of the
/// Newton-Euler path used by mass_matrix.
double brute_force_kinetic(const Skeleton& sk, const State& s) {
  const std::vector<Transform> poses = forward_kinematics(sk, s.q);
  double e = 0.0;
  for (size_t i = 0; i < sk.links.size(); ++i) {
    const LinkSpec& l = sk.links[i];
    if (l.mass == 0.0 && l.inertia.isZero()) continue;
    const MatX jac = jacobian(sk, s.q, l.id, l.com_offset);
    const Vec3 v = jac.topRows<3>() * s.qd;
    const Vec3 w = jac.bottomRows<3>() * s.qd;
    const Mat3 iw = poses[i].rotation * l.inertia * poses[i].rotation.transpose();
    e += 0.5 * l.mass * v.squaredNorm() + 0.5 * w.dot(iw * w);
  }
  return e;
}

}  // namespace

// ------------------------------------------------------------------- IK

TEST(SolveIk, AlreadyAtTarget) {
  const Skeleton sk = make_two_link_arm();
  VecX q0(2);
  q0 << 0.3, 0.4;
  IkProblem prob;
  prob.end_effector_link = 2;
  prob.end_effector_point = arm_tip_point();
  prob.target = arm_tip(sk, q0);
  const IkResult res = solve_ik(sk, q0, prob);
  EXPECT_EQ(res.status, IkStatus::Converged);
  EXPECT_EQ(res.iters, 0);
  EXPECT_EQ((res.q - q0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SolveIk, ConvergesToAnalyticSolution) {
  const Skeleton sk = make_two_link_arm();
  VecX q0(2);
  q0 << 0.1, 0.1;
  IkProblem prob;
  prob.end_effector_link = 2;
  prob.end_effector_point = arm_tip_point();
  prob.target = Vec3(1, 1, 0);
  const IkResult res = solve_ik(sk, q0, prob);
  ASSERT_EQ(res.status, IkStatus::Converged);
  EXPECT_LE(res.residual, prob.tol);
  const VecX q_ref = analytic_2r(prob.target);
  EXPECT_LT((arm_tip(sk, res.q) - arm_tip(sk, q_ref)).norm(), 2.0 * prob.tol);
  EXPECT_LT((arm_tip(sk, q_ref) - prob.target).norm(), 1e-9);
}

TEST(SolveIk, Unreachable) {
  const Skeleton sk = make_two_link_arm();
  IkProblem prob;
  prob.end_effector_link = 2;
  prob.end_effector_point = arm_tip_point();
  prob.target = Vec3(3, 0, 0);
  const IkResult res = solve_ik(sk, VecX::Zero(2), prob);
  EXPECT_EQ(res.status, IkStatus::Unreachable);
}

TEST(SolveIk, RandomReachableTargets) {
  const Skeleton sk = make_two_link_arm();
  std::mt19937_64 rng(23);
  VecX q0(2);
  q0 << 0.1, 0.1;
  IkProblem prob;
  prob.end_effector_link = 2;
  prob.end_effector_point = arm_tip_point();
  for (int trial = 0; trial < 100; ++trial) {
    const double r = 0.15 + 1.7 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    const double a = 2.0 * M_PI * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    prob.target = Vec3(r * std::cos(a), r * std::sin(a), 0.0);
    const IkResult res = solve_ik(sk, q0, prob);
    EXPECT_EQ(res.status, IkStatus::Converged)
        << "target " << prob.target.transpose() << " residual " << res.residual;
    EXPECT_LE(res.iters, 200);
    EXPECT_LT((arm_tip(sk, res.q) - arm_tip(sk, analytic_2r(prob.target))).norm(),
              2.0 * prob.tol + 1e-9);
  }
}

TEST(SolveIk, RespectsJointLimits) {
  const Skeleton sk = make_two_link_arm(-0.5, 0.5, -0.5, 0.5);
  IkProblem prob;
  prob.end_effector_link = 2;
  prob.end_effector_point = arm_tip_point();
  prob.target = Vec3(0, 2, 0);  // needs q1 = pi/2, far outside limits
  const IkResult res = solve_ik(sk, VecX::Zero(2), prob);
  EXPECT_NE(res.status, IkStatus::Converged);
  EXPECT_LE(res.q[0], 0.5 + 1e-12);
  EXPECT_GE(res.q[0], -0.5 - 1e-12);
  EXPECT_LE(res.q[1], 0.5 + 1e-12);
}

TEST(SolveIk, ResidualNonIncreasing) {
  const Skeleton sk = make_two_link_arm();
  // residual after a full solve is no larger than after one iteration
  IkProblem one;
  one.end_effector_link = 2;
  one.end_effector_point = arm_tip_point();
  one.target = Vec3(-0.5, 1.2, 0);
  one.max_iters = 1;
  VecX q0(2);
  q0 << 0.1, 0.1;
  double prev = (arm_tip(sk, q0) - one.target).norm();
  VecX q = q0;
  for (int i = 0; i < 50; ++i) {
    const IkResult res = solve_ik(sk, q, one);
    const double now = (arm_tip(sk, res.q) - one.target).norm();
    EXPECT_LE(now, prev + 1e-12);
    prev = now;
    q = res.q;
  }
}

// ------------------------------------------------------------- dynamics

TEST(MassMatrix, PointMassPendulum) {
  const Skeleton sk = make_pendulum(1);
  const MatX m = mass_matrix(sk, VecX::Zero(1));
  ASSERT_EQ(m.rows(), 1);
  EXPECT_NEAR(m(0, 0), 1.0, 1e-12);
}

TEST(MassMatrix, SymmetricPositiveDefinite) {
  const Skeleton sk = make_pendulum(2);
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const VecX q = random_config(sk, rng, 3.0);
    const MatX m = mass_matrix(sk, q);
    EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    Eigen::LLT<MatX> llt(m);
    EXPECT_EQ(llt.info(), Eigen::Success);
  }
}

TEST(MassMatrix, KineticEnergyMatchesBruteForce) {
  const Skeleton sk = make_pendulum(2);
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    State s;
    s.q = random_config(sk, rng, 3.0);
    s.qd = random_vector(2, rng, 2.0);
    const double via_m = 0.5 * s.qd.dot(mass_matrix(sk, s.q) * s.qd);
    EXPECT_NEAR(via_m, brute_force_kinetic(sk, s), 1e-9);
  }
}

TEST(ForwardDynamics, HangingEquilibrium) {
  const Skeleton sk = make_pendulum(1);
  State s;
  s.q = VecX::Constant(1, -M_PI / 2.0);  // pointing along -y, i.e. down
  s.qd = VecX::Zero(1);
  const VecX qdd = forward_dynamics(sk, s, VecX::Zero(1), pendulum_gravity());
  EXPECT_NEAR(qdd[0], 0.0, 1e-9);
}

TEST(ForwardDynamics, HorizontalPendulum) {
  const Skeleton sk = make_pendulum(1);
  State s;
  s.q = VecX::Zero(1);  // along +x: horizontal, pi/2 from hanging
  s.qd = VecX::Zero(1);
  const VecX qdd = forward_dynamics(sk, s, VecX::Zero(1), pendulum_gravity());
  EXPECT_NEAR(qdd[0], -9.81, 1e-9);
}

TEST(InverseDynamics, StaticHoldTorque) {
  const Skeleton sk = make_pendulum(1);
  State s;
  s.q = VecX::Zero(1);
  s.qd = VecX::Zero(1);
  const VecX tau = inverse_dynamics(sk, s, VecX::Zero(1), pendulum_gravity());
  EXPECT_NEAR(tau[0], 9.81, 1e-9);  // m g l
  const VecX zero = inverse_dynamics(sk, s, VecX::Zero(1), Vec3::Zero());
  EXPECT_NEAR(zero[0], 0.0, 1e-12);
}

TEST(Dynamics, RoundTrip) {
  const Skeleton sk = make_pendulum(2);
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    State s;
    s.q = random_config(sk, rng, 3.0);
    s.qd = random_vector(2, rng, 2.0);
    const VecX tau = random_vector(2, rng, 5.0);
    const VecX qdd = forward_dynamics(sk, s, tau, pendulum_gravity());
    const VecX back = inverse_dynamics(sk, s, qdd, pendulum_gravity());
    EXPECT_LT((back - tau).cwiseAbs().maxCoeff(), 1e-8);
    // and the reverse direction
    const VecX qdd2 = random_vector(2, rng, 5.0);
    const VecX tau2 = inverse_dynamics(sk, s, qdd2, pendulum_gravity());
    const VecX fwd = forward_dynamics(sk, s, tau2, pendulum_gravity());
    EXPECT_LT((fwd - qdd2).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Dynamics, RoundTripHumanoid) {
  std::ifstream in(std::string(MANIKIN_DATA_DIR) + "/humanoid18.json");
  ASSERT_TRUE(in.good());
  const Skeleton sk = load_skeleton(json::parse(in));
  std::mt19937_64 rng(43);
  const Vec3 g(0, 0, -9.81);
  for (int trial = 0; trial < 10; ++trial) {
    State s;
    s.q = random_config(sk, rng, 0.8);
    s.qd = random_vector(sk.dof, rng, 1.0);
    const VecX tau = random_vector(sk.dof, rng, 10.0);
    const VecX qdd = forward_dynamics(sk, s, tau, g);
    EXPECT_LT((inverse_dynamics(sk, s, qdd, g) - tau).cwiseAbs().maxCoeff(), 1e-8);
  }
}

// ---------------------------------------------------------- hybrid solve

TEST(HybridSolve, EmptyPrescriptionMatchesForwardDynamics) {
  const Skeleton sk = make_pendulum(2);
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    State s;
    s.q = random_config(sk, rng, 3.0);
    s.qd = random_vector(2, rng, 2.0);
    HybridPartition part;
    part.prescribed_qdd = VecX::Zero(0);
    part.applied_torques = random_vector(2, rng, 5.0);
    const HybridResult res = hybrid_solve(sk, s, part, pendulum_gravity());
    const VecX fd = forward_dynamics(sk, s, part.applied_torques, pendulum_gravity());
    EXPECT_EQ((res.qdd - fd).cwiseAbs().maxCoeff(), 0.0);  // bit-for-bit
    // independent dense solve
    const MatX m = mass_matrix(sk, s.q);
    const VecX h = bias_forces(sk, s, pendulum_gravity());
    const VecX dense = m.ldlt().solve(part.applied_torques - h);
    EXPECT_LT((res.qdd - dense).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(HybridSolve, FullPrescriptionMatchesInverseDynamics) {
  const Skeleton sk = make_pendulum(2);
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    State s;
    s.q = random_config(sk, rng, 3.0);
    s.qd = random_vector(2, rng, 2.0);
    HybridPartition part;
    part.prescribed = {0, 1};
    part.prescribed_qdd = random_vector(2, rng, 4.0);
    part.applied_torques = VecX::Zero(2);
    const HybridResult res = hybrid_solve(sk, s, part, pendulum_gravity());
    EXPECT_EQ((res.qdd - part.prescribed_qdd).cwiseAbs().maxCoeff(), 0.0);
    const VecX id = inverse_dynamics(sk, s, part.prescribed_qdd, pendulum_gravity());
    EXPECT_LT((res.constraint_torques - id).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(HybridSolve, LockedJointMatchesSinglePendulumOracle) {
  const Skeleton sk = make_pendulum(2);
  const double locked_angle = 0.7;
  State s;
  s.q = VecX::Zero(2);
  s.q[0] = locked_angle;
  s.q[1] = 0.3;
  s.qd = VecX::Zero(2);
  const double dt = 1e-3;
  HybridPartition part;
  part.prescribed = {0};
  part.prescribed_qdd = VecX::Zero(1);
  part.applied_torques = VecX::Zero(2);
  for (int i = 0; i < 1000; ++i) {
    const HybridResult res = hybrid_solve(sk, s, part, pendulum_gravity());
    // single pendulum pivoting at joint 2: qdd = -(g/l) cos(q1 + q2)
    const double oracle = -9.81 * std::cos(s.q[0] + s.q[1]);
    ASSERT_NEAR(res.qdd[1], oracle, 1e-6) << "step " << i;
    ASSERT_NEAR(res.qdd[0], 0.0, 1e-12);
    s = step(sk, s, res.qdd, dt);
  }
  EXPECT_NEAR(s.q[0], locked_angle, 1e-12);
}

// ------------------------------------------------------------ integration

TEST(Step, RestStaysAtRest) {
  const Skeleton sk = make_pendulum(1);
  State s;
  s.q = VecX::Constant(1, 0.2);
  s.qd = VecX::Zero(1);
  const State next = step(sk, s, VecX::Zero(1), 0.1);
  EXPECT_EQ(next.q[0], s.q[0]);
  EXPECT_EQ(next.qd[0], 0.0);
  EXPECT_NEAR(next.time, 0.1, 1e-15);
}

TEST(Step, ConstantVelocity) {
  const Skeleton sk = make_pendulum(1);
  State s;
  s.q = VecX::Zero(1);
  s.qd = VecX::Constant(1, 1.0);
  const State next = step(sk, s, VecX::Zero(1), 0.1);
  EXPECT_NEAR(next.q[0], 0.1, 1e-15);
}

TEST(Step, NonPositiveDt) {
  const Skeleton sk = make_pendulum(1);
  State s;
  s.q = VecX::Zero(1);
  s.qd = VecX::Zero(1);
  try {
    step(sk, s, VecX::Zero(1), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDt);
  }
}

TEST(Step, LimitClampZeroesVelocity) {
  const Skeleton sk = make_two_link_arm(-0.5, 0.5, -3.1, 3.1);
  State s;
  s.q = VecX::Zero(2);
  s.qd = VecX::Zero(2);
  s.qd[0] = 10.0;
  const State next = step(sk, s, VecX::Zero(2), 0.1);
  EXPECT_EQ(next.q[0], 0.5);
  EXPECT_EQ(next.qd[0], 0.0);
}

TEST(Step, DoublePendulumEnergyDrift) {
  const Skeleton sk = make_pendulum(2);
  const Vec3 g = pendulum_gravity();
  State s;
  s.q = VecX::Zero(2);  // released horizontal
  s.qd = VecX::Zero(2);
  // measure energy against the hanging minimum so E0 is a real scale
  VecX q_min(2);
  q_min << -M_PI / 2.0, 0.0;
  const double e_min = potential_energy(sk, q_min, g);
  const double e0 = mechanical_energy(sk, s, g) - e_min;
  ASSERT_GT(e0, 1.0);
  double worst = 0.0;
  const double dt = 1e-3;
  for (int i = 0; i < 5000; ++i) {
    const VecX qdd = forward_dynamics(sk, s, VecX::Zero(2), g);
    s = step(sk, s, qdd, dt);
    const double e = mechanical_energy(sk, s, g) - e_min;
    worst = std::max(worst, std::abs(e - e0) / e0);
  }
  EXPECT_LT(worst, 0.02) << "relative drift " << worst;
}

TEST(FreeFlyer, JacobianMatchesManifoldFiniteDifferences) {
  std::ifstream in(std::string(MANIKIN_DATA_DIR) + "/humanoid18.json");
  ASSERT_TRUE(in.good());
  const Skeleton sk = load_skeleton(json::parse(in));
  std::mt19937_64 rng(59);
  const int hand_link = 12;
  const Vec3 point(0, 0, -0.09);
  for (int trial = 0; trial < 5; ++trial) {
    const VecX q = random_config(sk, rng, 0.8);
    const MatX analytic = jacobian(sk, q, hand_link, point).topRows<3>();
    MatX fd(3, sk.dof);
    const double h = 1e-6;
    for (int k = 0; k < sk.dof; ++k) {
      VecX dq = VecX::Zero(sk.dof);
      dq[k] = h;
      const Vec3 plus = forward_kinematics(sk, sk.integrate_positions(q, dq))
                            [sk.link_idx(hand_link)].apply(point);
      dq[k] = -h;
      const Vec3 minus = forward_kinematics(sk, sk.integrate_positions(q, dq))
                             [sk.link_idx(hand_link)].apply(point);
      fd.col(k) = (plus - minus) / (2.0 * h);
    }
    EXPECT_LT((analytic - fd).cwiseAbs().maxCoeff(), 1e-5);
  }
}
