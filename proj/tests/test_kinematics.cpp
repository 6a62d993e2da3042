#include <random>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "curobot/kinematics.hpp"

using namespace curobot;

namespace
{

CubeGeometry table_geometry()
{
  CubeGeometry g;
  g.contact_offset_b = 0.01;
  g.r_e = 0.05;
  return g;
}

BodyTwist random_body_twist(std::mt19937_64 & rng)
{
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  std::uniform_real_distribution<double> w(-3.0, 3.0);
  return BodyTwist::body(v(rng), v(rng), w(rng));
}

}  // namespace

TEST(Kinematics, WorldToBody)
{
  auto b = world_to_body(BodyTwist::world(1, 0, 0), 0.0);
  EXPECT_EQ(b.frame, Frame::Body);
  EXPECT_NEAR(b.vx, 1.0, 1e-15);
  EXPECT_NEAR(b.vy, 0.0, 1e-15);

  // Oracle: R(pi/2)^T (1, 0) with R written out by hand.
  b = world_to_body(BodyTwist::world(1, 0, 0), kPi / 2);
  EXPECT_NEAR(b.vx, 0.0, 1e-15);
  EXPECT_NEAR(b.vy, -1.0, 1e-15);

  b = world_to_body(BodyTwist::world(0.1, 0.1, 0.5), kPi);
  EXPECT_NEAR(b.vx, -0.1, 1e-15);
  EXPECT_NEAR(b.vy, -0.1, 1e-15);
  EXPECT_DOUBLE_EQ(b.omega, 0.5);
}

TEST(Kinematics, FrameTagsAreChecked)
{
  const auto g = table_geometry();
  EXPECT_THROW(world_to_body(BodyTwist::body(1, 0, 0), 0.0), FrameMismatch);
  EXPECT_THROW(body_to_world(BodyTwist::world(1, 0, 0), 0.0), FrameMismatch);
  EXPECT_THROW(inverse_kinematics(BodyTwist::world(1, 0, 0), g, FaceId::F1), FrameMismatch);
}

TEST(Kinematics, JacobianRows)
{
  const auto g = table_geometry();
  for (FaceId f : kAllFaces) {
    const auto j = wheel_jacobian(g, f).J;
    const double h = std::sqrt(2.0) / 2.0;
    EXPECT_NEAR(j(0, 0), h, 1e-15);
    EXPECT_NEAR(j(0, 1), -h, 1e-15);
    EXPECT_NEAR(j(0, 2), -0.01414213562373095, 1e-15);
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(j(i, 2), -std::sqrt(2.0) * 0.01, 1e-15);
    }
    EXPECT_NEAR(j(0, 0), -j(2, 0), 1e-15);
    EXPECT_NEAR(j(0, 1), -j(2, 1), 1e-15);
    EXPECT_NEAR(j(0, 2), j(2, 2), 1e-15);
    const Eigen::Matrix3d jtj = j.transpose() * j;
    const Eigen::Vector3d d(2.0, 2.0, 8.0 * 0.01 * 0.01);
    EXPECT_LT((jtj - Eigen::Matrix3d(d.asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Kinematics, InverseKinematicsExamples)
{
  const auto g = table_geometry();
  WheelSpeeds q = inverse_kinematics(BodyTwist::body(0.1, 0, 0), g, FaceId::F1);
  const double a = 0.1 * std::sqrt(2.0) / 2.0 / 0.05;
  EXPECT_NEAR(q(0), a, 1e-12);
  EXPECT_NEAR(q(1), -a, 1e-12);
  EXPECT_NEAR(q(2), -a, 1e-12);
  EXPECT_NEAR(q(3), a, 1e-12);
  EXPECT_NEAR(a, 1.414, 1e-3);

  const double c = 0.1 * std::cos(kPi / 4);
  q = inverse_kinematics(BodyTwist::body(c, c, 0), g, FaceId::F1);
  EXPECT_NEAR(q(0), 0.0, 1e-12);
  EXPECT_NEAR(q(1), -2.0, 1e-12);
  EXPECT_NEAR(q(2), 0.0, 1e-12);
  EXPECT_NEAR(q(3), 2.0, 1e-12);

  q = inverse_kinematics(BodyTwist::body(0, 0, 0.1), g, FaceId::F1);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(q(i), -std::sqrt(2.0) * 0.1 * 0.01 / 0.05, 1e-15);
  }
  EXPECT_NEAR(q(0), -0.0283, 1e-4);
}

TEST(Kinematics, ThreeRoutesAgree)
{
  const auto g = table_geometry();
  std::mt19937_64 rng(7);
  for (int n = 0; n < 500; ++n) {
    const auto t = random_body_twist(rng);
    for (FaceId f : kAllFaces) {
      const auto a = inverse_kinematics(t, g, f);
      const auto b = inverse_kinematics_per_wheel(t, g, f);
      const auto c = inverse_kinematics_stacked(t, g, f);
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((a - c).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Kinematics, ForwardInverseRoundTrip)
{
  const auto g = table_geometry();
  std::mt19937_64 rng(11);
  for (int n = 0; n < 1000; ++n) {
    const auto t = random_body_twist(rng);
    const auto back = forward_kinematics(inverse_kinematics(t, g, FaceId::F1), g, FaceId::F1);
    EXPECT_EQ(back.frame, Frame::Body);
    EXPECT_NEAR(back.vx, t.vx, 1e-12);
    EXPECT_NEAR(back.vy, t.vy, 1e-12);
    EXPECT_NEAR(back.omega, t.omega, 1e-12);
  }
}

TEST(Kinematics, ForwardUniformWheels)
{
  const auto g = table_geometry();
  const WheelSpeeds ones = WheelSpeeds::Ones();
  // Oracle: SVD pseudo-inverse of J, independent of the normal-equation path.
  const Eigen::Matrix<double, 4, 3> j = wheel_jacobian(g, FaceId::F1).J;
  const Eigen::Vector3d oracle = g.r_e * j.jacobiSvd(Eigen::ComputeFullU | Eigen::ComputeFullV).solve(ones);
  const auto t = forward_kinematics(ones, g, FaceId::F1);
  EXPECT_NEAR(t.vx, oracle.x(), 1e-12);
  EXPECT_NEAR(t.vy, oracle.y(), 1e-12);
  EXPECT_NEAR(t.omega, oracle.z(), 1e-12);
  // Closed form -r_e * 4 / (4 sqrt(2) b).
  EXPECT_NEAR(t.vx, 0.0, 1e-12);
  EXPECT_NEAR(t.vy, 0.0, 1e-12);
  EXPECT_NEAR(t.omega, -3.5355339059327378, 1e-9);
  // Per-wheel coefficient of the rotation row.
  EXPECT_NEAR(forward_map(g, FaceId::F1)(2, 0), -0.8838834764831844, 1e-12);

  const auto zero = forward_kinematics(WheelSpeeds::Zero(), g, FaceId::F1);
  EXPECT_EQ(zero.vx, 0.0);
  EXPECT_EQ(zero.vy, 0.0);
  EXPECT_EQ(zero.omega, 0.0);
}

TEST(Kinematics, ForwardClosedForm)
{
  const auto g = table_geometry();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-5, 5);
  const auto phi = wheel_drive_angles(FaceId::F1);
  for (int n = 0; n < 100; ++n) {
    WheelSpeeds q(d(rng), d(rng), d(rng), d(rng));
    double vx = 0, vy = 0;
    for (int i = 0; i < 4; ++i) {
      vx += q(i) * std::cos(phi[static_cast<std::size_t>(i)]);
      vy += q(i) * std::sin(phi[static_cast<std::size_t>(i)]);
    }
    vx *= g.r_e / 2;
    vy *= g.r_e / 2;
    const double w = -g.r_e * q.sum() / (4 * std::sqrt(2.0) * g.contact_offset_b);
    const auto t = forward_kinematics(q, g, FaceId::F1);
    EXPECT_NEAR(t.vx, vx, 1e-12);
    EXPECT_NEAR(t.vy, vy, 1e-12);
    EXPECT_NEAR(t.omega, w, 1e-12);
  }
}

TEST(Kinematics, Linearity)
{
  const auto g = table_geometry();
  std::mt19937_64 rng(3);
  for (int n = 0; n < 200; ++n) {
    const auto w1 = random_body_twist(rng);
    const auto w2 = random_body_twist(rng);
    const double a = std::uniform_real_distribution<double>(-2, 2)(rng);
    const auto combo = BodyTwist::body(a * w1.vx + w2.vx, a * w1.vy + w2.vy, a * w1.omega + w2.omega);
    const WheelSpeeds lhs = inverse_kinematics(combo, g, FaceId::F2);
    const WheelSpeeds rhs = a * inverse_kinematics(w1, g, FaceId::F2) + inverse_kinematics(w2, g, FaceId::F2);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Kinematics, DiagonalSymmetryForTranslation)
{
  const auto g = table_geometry();
  std::mt19937_64 rng(9);
  for (int n = 0; n < 200; ++n) {
    auto t = random_body_twist(rng);
    t.omega = 0.0;
    const auto q = inverse_kinematics(t, g, FaceId::F1);
    EXPECT_NEAR(q(0), -q(2), 1e-12);
    EXPECT_NEAR(q(1), -q(3), 1e-12);
  }
}

TEST(Kinematics, BodyInverseIgnoresYaw)
{
  const auto g = table_geometry();
  const auto world = BodyTwist::world(0.2, -0.1, 0.3);
  for (double psi : {0.0, 0.7, -2.0, 3.0}) {
    const auto body = world_to_body(world, psi);
    const auto back = body_to_world(body, psi);
    EXPECT_NEAR(back.vx, world.vx, 1e-15);
    EXPECT_NEAR(back.vy, world.vy, 1e-15);
    const auto q1 = inverse_kinematics(body, g, FaceId::F1);
    const auto q2 = inverse_kinematics(world_to_body(world, psi + kTwoPi), g, FaceId::F1);
    EXPECT_LT((q1 - q2).cwiseAbs().maxCoeff(), 1e-12);
  }
}
