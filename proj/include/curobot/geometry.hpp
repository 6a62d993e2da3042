#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "curobot/common.hpp"

namespace curobot
{

/// Cone half-angle of every wheel: the angle between a body diagonal and a cube edge.
inline const double kConeAngle = std::atan(1.0 / std::sqrt(2.0));

/// 500 rpm motor limit expressed in rad/s.
inline constexpr double kDefaultWheelSpeedLimit = 500.0 * 2.0 * std::numbers::pi / 60.0;

/**
 * @brief Geometric constants of the cube robot.
 *
 * All kinematics derive from `contact_offset_b` and `r_e`; `half_edge` and `alpha`
 * are carried for completeness and visualization.
 */
struct CubeGeometry
{
  double half_edge{0.1};          ///< [m]
  double contact_offset_b{0.01};  ///< half-spacing of the ground contact points [m]
  double r_e{0.05};               ///< equivalent wheel radius [m]
  double alpha{kConeAngle};       ///< cone half-angle [rad]
  double u_max{kDefaultWheelSpeedLimit};  ///< wheel speed saturation [rad/s]

  void validate() const
  {
    auto positive = [](double v, const char * name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(std::string("geometry.") + name, "must be a finite value > 0");
      }
    };
    positive(half_edge, "half_edge");
    positive(contact_offset_b, "contact_offset_b");
    positive(r_e, "r_e");
    positive(u_max, "u_max");
    if (std::abs(alpha - kConeAngle) > 1e-12) {
      throw ValidationError("geometry.alpha", "cone angle is fixed at atan(1/sqrt(2))");
    }
  }
};

/// Wheels named by cube corner in the initial body frame (x forward, y left, z up).
enum class WheelId : std::uint8_t { DLF, DRF, DRB, DLB, ULF, URF, URB, ULB };

inline constexpr std::array<WheelId, 8> kAllWheels{
  WheelId::DLF, WheelId::DRF, WheelId::DRB, WheelId::DLB,
  WheelId::ULF, WheelId::URF, WheelId::URB, WheelId::ULB};

inline constexpr std::string_view to_string(WheelId w)
{
  switch (w) {
    case WheelId::DLF: return "DLF";
    case WheelId::DRF: return "DRF";
    case WheelId::DRB: return "DRB";
    case WheelId::DLB: return "DLB";
    case WheelId::ULF: return "ULF";
    case WheelId::URF: return "URF";
    case WheelId::URB: return "URB";
    case WheelId::ULB: return "ULB";
  }
  return "?";
}

/// Vertex sign triple (x, y, z) of a wheel in the initial body frame.
inline Eigen::Vector3d vertex_signs(WheelId w)
{
  const auto name = to_string(w);
  const double z = name[0] == 'U' ? 1.0 : -1.0;
  const double y = name[1] == 'L' ? 1.0 : -1.0;
  const double x = name[2] == 'F' ? 1.0 : -1.0;
  return {x, y, z};
}

enum class FaceId : int { F1 = 1, F2, F3, F4, F5, F6 };

inline constexpr std::array<FaceId, 6> kAllFaces{
  FaceId::F1, FaceId::F2, FaceId::F3, FaceId::F4, FaceId::F5, FaceId::F6};

inline constexpr int to_int(FaceId f) { return static_cast<int>(f); }

inline FaceId face_from_int(int value)
{
  if (value < 1 || value > 6) {
    throw InvalidArgument("face id must be in 1..6, got " + std::to_string(value));
  }
  return static_cast<FaceId>(value);
}

/// Outward unit normal of a face in the initial body frame.
inline Eigen::Vector3d outward_normal(FaceId f)
{
  switch (f) {
    case FaceId::F1: return -Eigen::Vector3d::UnitZ();
    case FaceId::F2: return Eigen::Vector3d::UnitY();
    case FaceId::F3: return Eigen::Vector3d::UnitZ();
    case FaceId::F4: return -Eigen::Vector3d::UnitY();
    case FaceId::F5: return -Eigen::Vector3d::UnitX();
    case FaceId::F6: return Eigen::Vector3d::UnitX();
  }
  return Eigen::Vector3d::Zero();
}

/**
 * @brief Axes of the redefined body frame for a landing face.
 *
 * Rows are the new X, Y, Z axes written in initial-frame coordinates, so the matrix maps
 * initial-frame coordinates to redefined-frame coordinates. New Z points from the landing
 * face toward the CoM; faces 1-4 keep the initial X; face 5 takes -Z and face 6 takes +Z
 * of the initial frame; Y completes a right-handed triad.
 */
inline Eigen::Matrix3d redefined_axes(FaceId f)
{
  const Eigen::Vector3d z = -outward_normal(f);
  Eigen::Vector3d x;
  switch (f) {
    case FaceId::F5: x = -Eigen::Vector3d::UnitZ(); break;
    case FaceId::F6: x = Eigen::Vector3d::UnitZ(); break;
    default: x = Eigen::Vector3d::UnitX(); break;
  }
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d m;
  m.row(0) = x.transpose();
  m.row(1) = y.transpose();
  m.row(2) = z.transpose();
  return m;
}

/// Four drive wheels of a landing face. Index i sits at quadrant i of the current body
/// frame: 0 at (+b,+b), 1 at (+b,-b), 2 at (-b,-b), 3 at (-b,+b).
using DriveWheelSet = std::array<WheelId, 4>;

inline int quadrant_index(double x, double y)
{
  if (x > 0.0) {
    return y > 0.0 ? 0 : 1;
  }
  return y < 0.0 ? 2 : 3;
}

inline DriveWheelSet drive_wheels_for_face(FaceId face)
{
  const Eigen::Vector3d n = outward_normal(face);
  const Eigen::Matrix3d axes = redefined_axes(face);
  DriveWheelSet set{};
  for (WheelId w : kAllWheels) {
    const Eigen::Vector3d s = vertex_signs(w);
    if (s.dot(n) <= 0.0) {
      continue;
    }
    const Eigen::Vector3d local = axes * s;
    set[static_cast<std::size_t>(quadrant_index(local.x(), local.y()))] = w;
  }
  return set;
}

/// Position of wheel `w` in the drive set of `face`, if it drives on that face.
inline std::optional<int> drive_slot(FaceId face, WheelId w)
{
  const auto set = drive_wheels_for_face(face);
  for (int i = 0; i < 4; ++i) {
    if (set[static_cast<std::size_t>(i)] == w) {
      return i;
    }
  }
  return std::nullopt;
}

/// Ground contact points of the equivalent circles, in the current body frame.
/// The layout is the same square for every face.
inline std::array<Eigen::Vector3d, 4> contact_points_for_face(FaceId /*face*/, const CubeGeometry & geom)
{
  const double b = geom.contact_offset_b;
  return {Eigen::Vector3d(b, b, 0.0), Eigen::Vector3d(b, -b, 0.0),
          Eigen::Vector3d(-b, -b, 0.0), Eigen::Vector3d(-b, b, 0.0)};
}

/// Drive direction angles phi_i: the wheel axis projection points from the contact
/// point toward the body origin (angle gamma_i); the drivable direction is gamma_i + pi/2.
inline std::array<double, 4> wheel_drive_angles(FaceId face)
{
  const CubeGeometry unit{};
  const auto points = contact_points_for_face(face, unit);
  std::array<double, 4> phi{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double gamma = std::atan2(-points[i].y(), -points[i].x());
    phi[i] = wrap_angle(gamma + kPi / 2.0);
  }
  return phi;
}

}  // namespace curobot
