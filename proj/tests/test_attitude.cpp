#include <random>

#include <gtest/gtest.h>

#include "curobot/attitude.hpp"

using namespace curobot;

TEST(Attitude, DetectCanonicalFaces)
{
  EXPECT_EQ(detect_landing_face({Eigen::Vector3d(0, 0, -9.81)}), FaceId::F1);
  EXPECT_EQ(detect_landing_face({Eigen::Vector3d(0, 0, 9.81)}), FaceId::F3);
  for (FaceId f : kAllFaces) {
    EXPECT_EQ(detect_landing_face({kGravity * outward_normal(f)}), f);
  }
}

TEST(Attitude, DetectNearEdgeIsAmbiguous)
{
  // Oracle: the two largest normalized dot products, computed directly.
  const Eigen::Vector3d g(-6.9, 0.1, -6.94);
  const Eigen::Vector3d u = g.normalized();
  ASSERT_LT(std::abs(u.z()) - std::abs(u.x()), 0.05);
  EXPECT_THROW(detect_landing_face({g}), AmbiguousFace);
}

TEST(Attitude, DetectRejectsFreeFall)
{
  EXPECT_THROW(detect_landing_face({Eigen::Vector3d(0, 0, -1.0)}), NotQuasiStatic);
  EXPECT_THROW(detect_landing_face({Eigen::Vector3d(0, 0, -20.0)}), NotQuasiStatic);
}

TEST(Attitude, DetectIsScaleInvariantInsideGate)
{
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Vector3d dir = Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized();
    const auto ref = classify_gravity(kGravity * dir);
    if (ref.status != FaceStatus::Ok) {
      continue;
    }
    ++checked;
    for (int k = 0; k <= 20; ++k) {
      const double s = 0.5 + 0.05 * k;
      const auto d = classify_gravity(s * kGravity * dir);
      ASSERT_EQ(d.status, FaceStatus::Ok);
      ASSERT_EQ(d.face, ref.face);
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(Attitude, FrameRemaps)
{
  EXPECT_TRUE(frame_remap(FaceId::F1).M.isIdentity());
  // Face 3: rotation by pi about initial X, checked with cross products.
  const Eigen::Matrix3d m3 = frame_remap(FaceId::F3).M;
  EXPECT_TRUE(m3.isApprox(Eigen::Vector3d(1, -1, -1).asDiagonal().toDenseMatrix()));
  EXPECT_TRUE(m3.row(0).cross(m3.row(1)).isApprox(m3.row(2)));
  const Eigen::Matrix3d m5 = frame_remap(FaceId::F5).M;
  const Eigen::Matrix3d m6 = frame_remap(FaceId::F6).M;
  EXPECT_FALSE(m5.isApprox(m6));
  for (FaceId f : kAllFaces) {
    const Eigen::Matrix3d m = frame_remap(f).M;
    EXPECT_NEAR(m.determinant(), 1.0, 1e-15);
    for (int r = 0; r < 3; ++r) {
      EXPECT_NEAR(m.row(r).cwiseAbs().sum(), 1.0, 1e-15);
      EXPECT_NEAR(m.col(r).cwiseAbs().sum(), 1.0, 1e-15);
    }
  }
}

TEST(Attitude, YawFromRotation)
{
  EXPECT_DOUBLE_EQ(yaw_from_rotation({Eigen::Matrix3d::Identity()}, FaceId::F1), 0.0);
  EXPECT_NEAR(yaw_from_rotation({rot_z(deg_to_rad(30))}, FaceId::F1), deg_to_rad(30), 1e-15);
}

TEST(Attitude, YawRecoveryRoundTrip)
{
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> yaw(-kPi, kPi);
  std::uniform_int_distribution<int> face(1, 6);
  for (int i = 0; i < 1000; ++i) {
    const double psi0 = yaw(rng);
    const FaceId f = face_from_int(face(rng));
    const Orientation o = level_orientation(psi0, f);
    ASSERT_TRUE(o.is_valid());
    // The composed orientation really rests on face f.
    ASSERT_EQ(detect_landing_face({o.R.transpose() * Eigen::Vector3d(0, 0, -kGravity)}), f);
    EXPECT_NEAR(wrap_angle(yaw_from_rotation(o, f) - psi0), 0.0, 1e-9);
  }
}

TEST(Attitude, YawAgreesWithSingleArgumentArctan)
{
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> yaw(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    const double psi0 = yaw(rng);
    const Orientation o{rot_z(psi0)};
    ASSERT_GT(o.R(0, 0), 0.0);
    EXPECT_NEAR(yaw_from_rotation(o, FaceId::F1), std::atan(o.R(1, 0) / o.R(0, 0)), 1e-12);
  }
}

TEST(Attitude, YawDegenerateWhenAxisVertical)
{
  // Resting on face 3 means initial Z is vertical, so the face-6 formula is undefined.
  const Orientation o = level_orientation(0.3, FaceId::F3);
  EXPECT_THROW(yaw_from_rotation(o, FaceId::F6), GimbalDegenerate);
}

TEST(Attitude, TrackerHoldsFaceThroughFreeFall)
{
  FaceTracker tracker(FaceId::F1);
  const double dt = 0.01;
  for (int i = 0; i < 50; ++i) {
    tracker.update(Eigen::Vector3d::Zero(), dt);
    EXPECT_EQ(tracker.face(), FaceId::F1);
  }
  // Land on face 6: specific force at rest is -g along the face normal.
  const Eigen::Vector3d f6 = -kGravity * outward_normal(FaceId::F6);
  int steps = 0;
  while (tracker.face() != FaceId::F6 && steps < 200) {
    tracker.update(f6, dt);
    ++steps;
  }
  EXPECT_EQ(tracker.face(), FaceId::F6);
  EXPECT_LT(steps, 50);
}

TEST(Attitude, TrackerFiltersSpikes)
{
  FaceTracker tracker(FaceId::F1);
  const Eigen::Vector3d rest = -kGravity * outward_normal(FaceId::F1);
  for (int i = 0; i < 20; ++i) {
    tracker.update(rest, 0.01);
  }
  // One sample pointing at another face does not flip the estimate.
  tracker.update(-kGravity * outward_normal(FaceId::F5), 0.01);
  EXPECT_EQ(tracker.face(), FaceId::F1);
}

TEST(Attitude, TrackerNeedsSustainedFace)
{
  FaceTracker tracker(FaceId::F1, 0.01, 0.2);
  const Eigen::Vector3d f5 = -kGravity * outward_normal(FaceId::F5);
  for (int i = 0; i < 15; ++i) {
    tracker.update(f5, 0.01);
  }
  EXPECT_EQ(tracker.face(), FaceId::F1);
  for (int i = 0; i < 20; ++i) {
    tracker.update(-kGravity * outward_normal(FaceId::F1), 0.01);
  }
  EXPECT_EQ(tracker.face(), FaceId::F1);
  for (int i = 0; i < 30; ++i) {
    tracker.update(f5, 0.01);
  }
  EXPECT_EQ(tracker.face(), FaceId::F5);
}
