#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "curobot/common.hpp"
#include "curobot/controller.hpp"
#include "curobot/estimator.hpp"
#include "curobot/geometry.hpp"
#include "curobot/kinematics.hpp"
#include "curobot/trajectory.hpp"

namespace curobot
{

/// Disturbances applied to the commanded motion. All sigmas are per plant step.
struct SlipModel
{
  double wheel_sigma{0.0};  ///< multiplicative noise on each driven wheel speed
  double twist_sigma{0.0};  ///< multiplicative noise on each body-twist component
  double drift_sigma{0.0};  ///< additive noise on each body-twist component [m/s, m/s, rad/s]

  bool is_zero() const { return wheel_sigma == 0.0 && twist_sigma == 0.0 && drift_sigma == 0.0; }
};

/// Noise actually injected into the simulated sensors.
struct SensorNoise
{
  double accel_sigma{0.05};
  double gyro_sigma{0.005};
  double uwb_sigma{0.10};
  double yaw_sigma{0.02};
};

struct EstimatorConfig
{
  ImuNoise imu{};  ///< noise the filter assumes for the IMU
  double uwb_sigma{0.10};
  double yaw_sigma{0.02};
  double imu_rate{100.0};  ///< [Hz]
  double uwb_rate{10.0};   ///< [Hz]
  double yaw_rate{10.0};   ///< [Hz]
  bool yaw_channel{true};
  double flip_inflation{100.0};
  double face_time_constant{0.1};  ///< [s]
  double face_dwell{0.2};          ///< [s]
  EskfInit init{};
  SensorNoise sensor_noise{};
};

/**
 * @brief Scripted tip-over onto an adjacent face.
 *
 * The axis is horizontal; with `axis_frame == Body` it is read in the current body frame
 * (x forward, y left) at the trigger instant. Rotation sense follows the right-hand rule.
 */
struct FlipEvent
{
  enum class Trigger { Time, Region };

  Trigger trigger{Trigger::Time};
  double time{0.0};                            ///< [s]
  Eigen::Vector2d center{0.0, 0.0};            ///< region trigger center [m]
  double radius{0.0};                          ///< region trigger radius [m]
  Eigen::Vector3d axis{0.0, 1.0, 0.0};
  Frame axis_frame{Frame::Body};
  double angle_deg{90.0};
  double fall_duration{0.5};  ///< [s]
};

/// Smooth deterministic bump field h(x, y) = A sin(2 pi x / L) sin(2 pi y / L).
struct Terrain
{
  enum class Kind { Flat, Bumps };

  Kind kind{Kind::Flat};
  double amplitude{0.0};   ///< A [m]
  double wavelength{1.0};  ///< L [m]
  double slip_gain{0.0};   ///< extra multiplicative twist noise per unit slope

  double height(double x, double y) const
  {
    if (kind == Kind::Flat) {
      return 0.0;
    }
    const double k = kTwoPi / wavelength;
    return amplitude * std::sin(k * x) * std::sin(k * y);
  }

  Eigen::Vector2d gradient(double x, double y) const
  {
    if (kind == Kind::Flat) {
      return Eigen::Vector2d::Zero();
    }
    const double k = kTwoPi / wavelength;
    return amplitude * k * Eigen::Vector2d(std::cos(k * x) * std::sin(k * y), std::sin(k * x) * std::cos(k * y));
  }
};

enum class Feedback { Truth, Estimator };

inline const char * to_string(Feedback f) { return f == Feedback::Truth ? "truth" : "estimator"; }

struct RunConfig
{
  double duration{10.0};  ///< [s]
  double dt{0.01};        ///< plant step [s]
  std::uint64_t seed{1};
  Feedback feedback{Feedback::Truth};
  Pose initial_pose{};
  FaceId initial_face{FaceId::F1};
};

struct Scenario
{
  std::string id{"scenario"};
  CubeGeometry geometry{};
  TrajectoryDescriptor trajectory{};
  ControllerConfig controller{};
  EstimatorConfig estimator{};
  SlipModel slip{};
  std::vector<FlipEvent> events;
  Terrain terrain{};
  RunConfig run{};

  /// Number of plant steps; the trace holds one more row than this.
  long steps() const { return std::lround(run.duration / run.dt); }

  long control_ratio() const { return std::lround(controller.dt / run.dt); }

  void validate() const
  {
    geometry.validate();
    ReferenceTrajectory check(trajectory);
    controller.validate();

    auto positive = [](double v, const std::string & field) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(field, "must be a finite value > 0");
      }
    };
    auto non_negative = [](double v, const std::string & field) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ValidationError(field, "must be a finite value >= 0");
      }
    };

    positive(run.dt, "run.dt");
    if (!(run.duration >= run.dt) || !std::isfinite(run.duration)) {
      throw ValidationError("run.duration", "must be >= run.dt");
    }
    if (std::abs(steps() * run.dt - run.duration) > 1e-9 * std::max(1.0, run.duration)) {
      throw ValidationError("run.duration", "must be a whole number of plant steps");
    }
    if (control_ratio() < 1 || std::abs(control_ratio() * run.dt - controller.dt) > 1e-9) {
      throw ValidationError("controller.dt", "must be a whole multiple of run.dt");
    }
    if (!std::isfinite(run.initial_pose.x) || !std::isfinite(run.initial_pose.y) ||
        !std::isfinite(run.initial_pose.psi)) {
      throw ValidationError("run.initial_pose", "must be finite");
    }

    non_negative(slip.wheel_sigma, "slip.wheel_sigma");
    non_negative(slip.twist_sigma, "slip.twist_sigma");
    non_negative(slip.drift_sigma, "slip.drift_sigma");

    const auto & e = estimator;
    non_negative(e.imu.accel_sigma, "estimator.accel_sigma");
    non_negative(e.imu.gyro_sigma, "estimator.gyro_sigma");
    positive(e.uwb_sigma, "estimator.uwb_sigma");
    positive(e.yaw_sigma, "estimator.yaw_sigma");
    for (const auto & [rate, field] : {std::pair{e.imu_rate, "estimator.imu_rate"},
                                       std::pair{e.uwb_rate, "estimator.uwb_rate"},
                                       std::pair{e.yaw_rate, "estimator.yaw_rate"}}) {
      positive(rate, field);
      const double ratio = 1.0 / (rate * run.dt);
      if (std::lround(ratio) < 1 || std::abs(std::lround(ratio) - ratio) > 1e-6) {
        throw ValidationError(field, "period must be a whole multiple of run.dt");
      }
    }
    if (!(e.flip_inflation >= 1.0)) {
      throw ValidationError("estimator.flip_inflation", "must be >= 1");
    }
    positive(e.face_time_constant, "estimator.face_time_constant");
    non_negative(e.face_dwell, "estimator.face_dwell");
    positive(e.init.p_sigma, "estimator.init.p_sigma");
    positive(e.init.v_sigma, "estimator.init.v_sigma");
    positive(e.init.psi_sigma, "estimator.init.psi_sigma");
    non_negative(e.sensor_noise.accel_sigma, "estimator.sensor_noise.accel_sigma");
    non_negative(e.sensor_noise.gyro_sigma, "estimator.sensor_noise.gyro_sigma");
    non_negative(e.sensor_noise.uwb_sigma, "estimator.sensor_noise.uwb_sigma");
    non_negative(e.sensor_noise.yaw_sigma, "estimator.sensor_noise.yaw_sigma");

    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto & ev = events[i];
      const std::string f = "events[" + std::to_string(i) + "]";
      if (ev.trigger == FlipEvent::Trigger::Time) {
        if (!(ev.time >= 0.0) || ev.time > run.duration) {
          throw ValidationError(f + ".time", "must lie within [0, run.duration]");
        }
      } else {
        positive(ev.radius, f + ".radius");
      }
      non_negative(ev.fall_duration, f + ".fall_duration");
      if (std::abs(ev.axis.z()) > 1e-9 || std::abs(ev.axis.norm() - 1.0) > 1e-6) {
        throw ValidationError(f + ".axis", "must be a horizontal unit vector");
      }
      if (!std::isfinite(ev.angle_deg) || ev.angle_deg == 0.0) {
        throw ValidationError(f + ".angle_deg", "must be finite and nonzero");
      }
    }

    if (terrain.kind == Terrain::Kind::Bumps) {
      non_negative(terrain.amplitude, "terrain.amplitude");
      positive(terrain.wavelength, "terrain.wavelength");
      non_negative(terrain.slip_gain, "terrain.slip_gain");
    }
  }
};

}  // namespace curobot
