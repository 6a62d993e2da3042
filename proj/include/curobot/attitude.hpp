#pragma once

#include <array>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "curobot/common.hpp"
#include "curobot/geometry.hpp"

namespace curobot
{

/// Rotation of the INITIAL body frame relative to the world frame.
struct Orientation
{
  Eigen::Matrix3d R{Eigen::Matrix3d::Identity()};

  bool is_valid(double tol = 1e-9) const
  {
    return (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(R.determinant() - 1.0) <= tol;
  }
};

/// Signed permutation mapping initial-frame coordinates to redefined-frame coordinates.
struct FrameRemap
{
  Eigen::Matrix3d M{Eigen::Matrix3d::Identity()};
};

/// Gravity vector expressed in the initial body frame [m/s^2].
struct GravityReading
{
  Eigen::Vector3d a{0.0, 0.0, -kGravity};
};

enum class FaceStatus { Ok, Ambiguous, NotQuasiStatic };

struct FaceDetection
{
  FaceStatus status{FaceStatus::Ok};
  FaceId face{FaceId::F1};
  double margin{0.0};  ///< gap between the best and second-best normalized dot products
};

inline constexpr double kQuasiStaticLow = 0.5 * kGravity;
inline constexpr double kQuasiStaticHigh = 1.5 * kGravity;
inline constexpr double kAmbiguityMargin = 0.05;

/// Accelerometers report specific force; gravity is its negation at rest.
inline constexpr double kSpecificForceToGravity = -1.0;

inline Eigen::Matrix3d rot_z(double psi)
{
  return Eigen::AngleAxisd(psi, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

inline Eigen::Matrix3d rot_axis(const Eigen::Vector3d & axis, double angle)
{
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

/// Non-throwing face classification used by the tracker.
inline FaceDetection classify_gravity(const Eigen::Vector3d & g_body)
{
  FaceDetection out;
  const double mag = g_body.norm();
  // closed interval, with slack for the rounding of norm()
  if (!(mag >= kQuasiStaticLow * (1.0 - 1e-12) && mag <= kQuasiStaticHigh * (1.0 + 1e-12))) {
    out.status = FaceStatus::NotQuasiStatic;
    return out;
  }
  const Eigen::Vector3d dir = g_body / mag;
  double best = -2.0;
  double second = -2.0;
  for (FaceId f : kAllFaces) {
    const double d = outward_normal(f).dot(dir);
    if (d > best) {
      second = best;
      best = d;
      out.face = f;
    } else if (d > second) {
      second = d;
    }
  }
  out.margin = best - second;
  if (out.margin < kAmbiguityMargin) {
    out.status = FaceStatus::Ambiguous;
  }
  return out;
}

/// The landing face is the one whose outward normal is best aligned with gravity.
inline FaceId detect_landing_face(const GravityReading & g_body)
{
  const FaceDetection d = classify_gravity(g_body.a);
  switch (d.status) {
    case FaceStatus::NotQuasiStatic:
      throw NotQuasiStatic("gravity magnitude " + std::to_string(g_body.a.norm()) +
                           " m/s^2 outside the quasi-static gate");
    case FaceStatus::Ambiguous:
      throw AmbiguousFace("landing face ambiguous (margin " + std::to_string(d.margin) + ")");
    case FaceStatus::Ok:
      break;
  }
  return d.face;
}

inline FrameRemap frame_remap(FaceId face) { return FrameRemap{redefined_axes(face)}; }

/// Initial-frame orientation whose redefined frame (for `face`) is level with yaw `psi`.
inline Orientation level_orientation(double psi, FaceId face)
{
  return Orientation{rot_z(psi) * frame_remap(face).M};
}

/// Yaw of the redefined body frame extracted from the initial-frame attitude matrix.
inline double yaw_from_rotation(const Orientation & o, FaceId face)
{
  const Eigen::Matrix3d & r = o.R;
  double num = 0.0;
  double den = 0.0;
  switch (face) {
    case FaceId::F5:
      num = -r(1, 2);
      den = -r(0, 2);
      break;
    case FaceId::F6:
      num = r(1, 2);
      den = r(0, 2);
      break;
    default:
      num = r(1, 0);
      den = r(0, 0);
      break;
  }
  if (std::abs(num) < 1e-9 && std::abs(den) < 1e-9) {
    throw GimbalDegenerate("yaw undefined: redefined X axis is vertical for face " +
                           std::to_string(to_int(face)));
  }
  return wrap_angle(std::atan2(num, den));
}

/**
 * @brief Landing-face tracker over accelerometer samples.
 *
 * Low-pass filters the gravity estimate (first order, default 0.1 s) and re-classifies it
 * each sample. Ambiguous or non-quasi-static estimates keep the previous face, and a new
 * face is adopted only after it has classified cleanly for `dwell` seconds in a row.
 */
class FaceTracker
{
public:
  explicit FaceTracker(FaceId initial = FaceId::F1, double time_constant = 0.1, double dwell = 0.2)
    : face_(initial), candidate_(initial), time_constant_(time_constant), dwell_(dwell),
      gravity_(kGravity * outward_normal(initial))
  {
    if (!(time_constant > 0.0)) {
      throw InvalidArgument("face tracker time constant must be > 0");
    }
    if (!(dwell >= 0.0)) {
      throw InvalidArgument("face tracker dwell must be >= 0");
    }
  }

  FaceId update(const Eigen::Vector3d & specific_force, double dt)
  {
    const double alpha = 1.0 - std::exp(-dt / time_constant_);
    gravity_ += alpha * (kSpecificForceToGravity * specific_force - gravity_);
    last_ = classify_gravity(gravity_);
    if (last_.status != FaceStatus::Ok || last_.face == face_) {
      candidate_ = face_;
      held_ = 0.0;
      return face_;
    }
    if (last_.face != candidate_) {
      candidate_ = last_.face;
      held_ = 0.0;
    }
    held_ += dt;
    if (held_ >= dwell_ - 1e-12) {
      face_ = candidate_;
      held_ = 0.0;
    }
    return face_;
  }

  FaceId face() const { return face_; }
  const Eigen::Vector3d & filtered_gravity() const { return gravity_; }
  const FaceDetection & last_detection() const { return last_; }

private:
  FaceId face_;
  FaceId candidate_;
  double time_constant_;
  double dwell_;
  double held_{0.0};
  Eigen::Vector3d gravity_;
  FaceDetection last_{};
};

}  // namespace curobot
