#pragma once

#include <array>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "curobot/common.hpp"
#include "curobot/geometry.hpp"

namespace curobot
{

enum class Frame { World, Body };

inline constexpr const char * to_string(Frame f) { return f == Frame::World ? "world" : "body"; }

/// Planar configuration (s_x, s_y, psi) in the world frame.
struct Pose
{
  double x{0.0};
  double y{0.0};
  double psi{0.0};

  Eigen::Vector2d position() const { return {x, y}; }
};

/// Planar velocity (v_x, v_y, omega) tagged with the frame it is expressed in.
struct BodyTwist
{
  Frame frame{Frame::Body};
  double vx{0.0};
  double vy{0.0};
  double omega{0.0};

  static BodyTwist world(double vx, double vy, double omega) { return {Frame::World, vx, vy, omega}; }
  static BodyTwist body(double vx, double vy, double omega) { return {Frame::Body, vx, vy, omega}; }

  Eigen::Vector3d vector() const { return {vx, vy, omega}; }
};

/// Drive-wheel angular rates [rad/s], ordered per DriveWheelSet.
using WheelSpeeds = Eigen::Vector4d;

/// q_dot = (1 / r_e) * J * body_twist.
struct WheelJacobian
{
  Eigen::Matrix<double, 4, 3> J;
};

inline void expect_frame(const BodyTwist & t, Frame expected, const char * op)
{
  if (t.frame != expected) {
    throw FrameMismatch(std::string(op) + ": expected a " + to_string(expected) +
                        "-frame twist, got " + to_string(t.frame));
  }
}

/// Planar part of the body-to-world rotation T(psi).
inline Eigen::Matrix2d planar_rotation(double psi)
{
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

/// 3x3 body-to-world transform T(psi); omega passes through unchanged.
inline Eigen::Matrix3d twist_transform(double psi)
{
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t.topLeftCorner<2, 2>() = planar_rotation(psi);
  return t;
}

inline BodyTwist world_to_body(const BodyTwist & twist_world, double psi)
{
  expect_frame(twist_world, Frame::World, "world_to_body");
  const Eigen::Vector2d v = planar_rotation(psi).transpose() * Eigen::Vector2d(twist_world.vx, twist_world.vy);
  return BodyTwist::body(v.x(), v.y(), twist_world.omega);
}

inline BodyTwist body_to_world(const BodyTwist & twist_body, double psi)
{
  expect_frame(twist_body, Frame::Body, "body_to_world");
  const Eigen::Vector2d v = planar_rotation(psi) * Eigen::Vector2d(twist_body.vx, twist_body.vy);
  return BodyTwist::world(v.x(), v.y(), twist_body.omega);
}

inline WheelJacobian wheel_jacobian(const CubeGeometry & geom, FaceId face)
{
  const auto phi = wheel_drive_angles(face);
  const auto p = contact_points_for_face(face, geom);
  WheelJacobian jac;
  for (std::size_t i = 0; i < 4; ++i) {
    const double c = std::cos(phi[i]);
    const double s = std::sin(phi[i]);
    // (z x p_i) . (cos phi_i, sin phi_i)
    const double spin = -p[i].y() * c + p[i].x() * s;
    jac.J.row(static_cast<Eigen::Index>(i)) << c, s, spin;
  }
  return jac;
}

inline WheelSpeeds inverse_kinematics(const BodyTwist & twist_body, const CubeGeometry & geom, FaceId face)
{
  expect_frame(twist_body, Frame::Body, "inverse_kinematics");
  return wheel_jacobian(geom, face).J * twist_body.vector() / geom.r_e;
}

/**
 * Per-wheel route: equivalent-circle velocity v_i = T1*chi + (T2*chi) x p_i, projected on
 * the drivable direction and divided by r_e. Kept as an independent formulation of
 * `inverse_kinematics`.
 */
inline WheelSpeeds inverse_kinematics_per_wheel(const BodyTwist & twist_body, const CubeGeometry & geom, FaceId face)
{
  expect_frame(twist_body, Frame::Body, "inverse_kinematics_per_wheel");
  Eigen::Matrix3d t1 = Eigen::Matrix3d::Zero();
  t1(0, 0) = 1.0;
  t1(1, 1) = 1.0;
  Eigen::Matrix3d t2 = Eigen::Matrix3d::Zero();
  t2(2, 2) = 1.0;
  const Eigen::Vector3d chi = twist_body.vector();
  const auto phi = wheel_drive_angles(face);
  const auto p = contact_points_for_face(face, geom);
  WheelSpeeds q;
  for (std::size_t i = 0; i < 4; ++i) {
    const Eigen::Vector3d v = t1 * chi + (t2 * chi).cross(p[i]);
    const double tangential = v.x() * std::cos(phi[i]) + v.y() * std::sin(phi[i]);
    q(static_cast<Eigen::Index>(i)) = tangential / geom.r_e;
  }
  return q;
}

/// Stacked route: q = diag{B (v_m + Omega P)} / r_e.
inline WheelSpeeds inverse_kinematics_stacked(const BodyTwist & twist_body, const CubeGeometry & geom, FaceId face)
{
  expect_frame(twist_body, Frame::Body, "inverse_kinematics_stacked");
  const auto phi = wheel_drive_angles(face);
  const auto p = contact_points_for_face(face, geom);
  Eigen::Matrix<double, 4, 3> b_mat = Eigen::Matrix<double, 4, 3>::Zero();
  Eigen::Matrix<double, 3, 4> p_mat;
  for (Eigen::Index i = 0; i < 4; ++i) {
    b_mat(i, 0) = std::cos(phi[static_cast<std::size_t>(i)]);
    b_mat(i, 1) = std::sin(phi[static_cast<std::size_t>(i)]);
    p_mat.col(i) = p[static_cast<std::size_t>(i)];
  }
  Eigen::Matrix3d omega = Eigen::Matrix3d::Zero();
  omega(0, 1) = -twist_body.omega;
  omega(1, 0) = twist_body.omega;
  const Eigen::Vector3d v_m(twist_body.vx, twist_body.vy, 0.0);
  const Eigen::Matrix<double, 3, 4> inner = (omega * p_mat).colwise() + v_m;
  const Eigen::Matrix4d full = b_mat * inner;
  return full.diagonal() / geom.r_e;
}

/// Least-squares map from wheel speeds to body twist: r_e (J^T J)^{-1} J^T.
inline Eigen::Matrix<double, 3, 4> forward_map(const CubeGeometry & geom, FaceId face)
{
  const Eigen::Matrix<double, 4, 3> j = wheel_jacobian(geom, face).J;
  const Eigen::Matrix3d jtj = j.transpose() * j;
  return geom.r_e * jtj.inverse() * j.transpose();
}

inline BodyTwist forward_kinematics(const WheelSpeeds & q_dot, const CubeGeometry & geom, FaceId face)
{
  const Eigen::Vector3d v = forward_map(geom, face) * q_dot;
  return BodyTwist::body(v.x(), v.y(), v.z());
}

}  // namespace curobot
