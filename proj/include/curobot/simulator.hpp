#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "curobot/attitude.hpp"
#include "curobot/common.hpp"
#include "curobot/controller.hpp"
#include "curobot/estimator.hpp"
#include "curobot/geometry.hpp"
#include "curobot/kinematics.hpp"
#include "curobot/scenario.hpp"
#include "curobot/trace.hpp"
#include "curobot/trajectory.hpp"

namespace curobot
{

struct PlantState
{
  Pose pose;
  Orientation orientation;
  FaceId face{FaceId::F1};
  double height_offset{0.0};
  double t{0.0};
  bool airborne{false};

  static PlantState at_rest(const Pose & pose, FaceId face)
  {
    PlantState s;
    s.pose = Pose{pose.x, pose.y, wrap_angle(pose.psi)};
    s.face = face;
    s.orientation = level_orientation(s.pose.psi, face);
    return s;
  }
};

/// Exact pose update for a body twist held constant over dt.
inline Pose integrate_se2(const Pose & pose, const BodyTwist & twist_body, double dt)
{
  expect_frame(twist_body, Frame::Body, "integrate_se2");
  const double th = twist_body.omega * dt;
  Eigen::Vector2d d;
  if (std::abs(th) < 1e-12) {
    d = Eigen::Vector2d(twist_body.vx, twist_body.vy) * dt;
  } else {
    const double s = std::sin(th);
    const double c1 = 1.0 - std::cos(th);
    const double w = twist_body.omega;
    d = Eigen::Vector2d((s * twist_body.vx - c1 * twist_body.vy) / w, (c1 * twist_body.vx + s * twist_body.vy) / w);
  }
  const Eigen::Vector2d p = pose.position() + planar_rotation(pose.psi) * d;
  return Pose{p.x(), p.y(), wrap_angle(pose.psi + th)};
}

/**
 * @brief Advances the kinematic plant by one step.
 *
 * `u` is ordered per the drive-wheel set of `state.face`. While airborne the command is
 * ignored and the pose holds. `applied` receives the body twist actually integrated.
 */
inline PlantState plant_step(const PlantState & state, const WheelSpeeds & u, double dt, const CubeGeometry & geom,
                             const SlipModel & slip, const Terrain & terrain, std::mt19937_64 & rng,
                             BodyTwist * applied = nullptr)
{
  PlantState next = state;
  next.t = state.t + dt;
  if (state.airborne) {
    if (applied != nullptr) {
      *applied = BodyTwist::body(0, 0, 0);
    }
    return next;
  }
  std::normal_distribution<double> normal(0.0, 1.0);

  WheelSpeeds q = u;
  if (slip.wheel_sigma > 0.0) {
    for (int i = 0; i < 4; ++i) {
      q(i) *= 1.0 + slip.wheel_sigma * normal(rng);
    }
  }
  Eigen::Vector3d v = forward_kinematics(q, geom, state.face).vector();
  const double terrain_sigma = terrain.slip_gain * terrain.gradient(state.pose.x, state.pose.y).norm();
  const double mult_sigma = std::hypot(slip.twist_sigma, terrain_sigma);
  if (mult_sigma > 0.0) {
    for (int i = 0; i < 3; ++i) {
      v(i) *= 1.0 + mult_sigma * normal(rng);
    }
  }
  if (slip.drift_sigma > 0.0) {
    for (int i = 0; i < 3; ++i) {
      v(i) += slip.drift_sigma * normal(rng);
    }
  }
  const BodyTwist twist = BodyTwist::body(v.x(), v.y(), v.z());
  if (applied != nullptr) {
    *applied = twist;
  }
  next.pose = integrate_se2(state.pose, twist, dt);
  next.orientation = level_orientation(next.pose.psi, next.face);
  next.height_offset = terrain.height(next.pose.x, next.pose.y);
  return next;
}

/// World-frame flip axis for `event` given the current state.
inline Eigen::Vector3d flip_axis_world(const PlantState & state, const FlipEvent & event)
{
  const Eigen::Vector3d & a = event.axis;
  if (!a.allFinite() || std::abs(a.z()) > 1e-9 || std::abs(a.norm() - 1.0) > 1e-6) {
    throw InvalidAxis("flip axis must be a horizontal unit vector");
  }
  if (event.axis_frame == Frame::World) {
    return a;
  }
  const Eigen::Vector2d w = planar_rotation(state.pose.psi) * a.head<2>();
  return {w.x(), w.y(), 0.0};
}

/**
 * @brief Tips the cube onto an adjacent face.
 *
 * The rotated attitude settles onto the face closest to the ground, so the new orientation
 * is always level for the new face. Planar position is preserved; yaw may jump.
 */
inline PlantState apply_flip(const PlantState & state, const FlipEvent & event)
{
  const Eigen::Vector3d axis = flip_axis_world(state, event);
  const Eigen::Matrix3d r = rot_axis(axis, deg_to_rad(event.angle_deg)) * state.orientation.R;
  const FaceDetection det = classify_gravity(r.transpose() * Eigen::Vector3d(0.0, 0.0, -kGravity));
  PlantState next = state;
  next.face = det.face;
  next.pose.psi = yaw_from_rotation(Orientation{r}, det.face);
  next.orientation = level_orientation(next.pose.psi, next.face);
  next.airborne = event.fall_duration > 0.0;
  return next;
}

/// Re-expresses a command ordered for `from`'s drive wheels in `to`'s order. Wheels that do
/// not drive on `to` are dropped; newly grounded wheels get zero.
inline WheelSpeeds map_command(const WheelSpeeds & u, FaceId from, FaceId to)
{
  if (from == to) {
    return u;
  }
  const DriveWheelSet dst = drive_wheels_for_face(to);
  WheelSpeeds out = WheelSpeeds::Zero();
  for (int i = 0; i < 4; ++i) {
    if (const auto slot = drive_slot(from, dst[static_cast<std::size_t>(i)])) {
      out(i) = u(*slot);
    }
  }
  return out;
}

/// 3-D specific force in the initial body frame for a world acceleration.
inline Eigen::Vector3d specific_force(const Orientation & o, const Eigen::Vector3d & a_world, bool free_fall)
{
  if (free_fall) {
    return Eigen::Vector3d::Zero();
  }
  return o.R.transpose() * (a_world + Eigen::Vector3d(0.0, 0.0, kGravity));
}

/**
 * @brief IMU, UWB and attitude-sensor synthesis.
 *
 * The planar acceleration is the change of chord velocity between consecutive IMU
 * intervals, rotated into the body frame at the start of the interval. The gyro reports
 * the physical vertical rate, so yaw jumps caused by re-labelling the body frame after a
 * flip do not appear in it. The planar IMU frame turns with the gyro and only takes the new
 * labelling once `acknowledge_relabel` is called.
 */
class SensorSuite
{
public:
  SensorSuite(const PlantState & initial, const SensorNoise & noise, std::uint64_t seed)
    : noise_(noise), rng_(seed), last_p_(initial.pose.position()), last_psi_(initial.pose.psi),
      imu_psi_(initial.pose.psi), last_t_(initial.t)
  {
  }

  void note_yaw_jump(double jump) { yaw_jump_ += jump; }

  /// The estimator has adopted the new face labelling; the planar IMU frame follows it from here.
  void acknowledge_relabel(const PlantState & s) { imu_psi_ = s.pose.psi; }

  struct ImuReading
  {
    ImuSample imu;
    Eigen::Vector3d specific_force{Eigen::Vector3d::Zero()};
  };

  ImuReading imu(const PlantState & s)
  {
    const double dt = s.t - last_t_;
    if (!(dt > 0.0)) {
      throw NonMonotonicTime("IMU synthesis requires increasing time");
    }
    const Eigen::Vector2d chord = (s.pose.position() - last_p_) / dt;
    const Eigen::Vector2d a_world = (chord - last_v_) / dt;
    ImuReading out;
    out.imu.t = s.t;
    const double turn = wrap_angle(s.pose.psi - last_psi_) - wrap_angle(yaw_jump_);
    out.imu.a_body = planar_rotation(imu_psi_).transpose() * a_world;
    out.imu.gyro_z = turn / dt;
    imu_psi_ = wrap_angle(imu_psi_ + turn);
    out.specific_force = specific_force(s.orientation, Eigen::Vector3d(a_world.x(), a_world.y(), 0.0), s.airborne);
    if (noise_.accel_sigma > 0.0) {
      out.imu.a_body += noise_.accel_sigma * Eigen::Vector2d(n(), n());
      out.specific_force += noise_.accel_sigma * Eigen::Vector3d(n(), n(), n());
    }
    if (noise_.gyro_sigma > 0.0) {
      out.imu.gyro_z += noise_.gyro_sigma * n();
    }
    last_v_ = chord;
    last_p_ = s.pose.position();
    last_psi_ = s.pose.psi;
    last_t_ = s.t;
    yaw_jump_ = 0.0;
    return out;
  }

  UwbFix uwb(const PlantState & s, double filter_sigma)
  {
    UwbFix fix{s.pose.position(), filter_sigma, s.t};
    if (noise_.uwb_sigma > 0.0) {
      fix.p_meas += noise_.uwb_sigma * Eigen::Vector2d(n(), n());
    }
    return fix;
  }

  /// Absolute yaw read through the face the estimator believes in; empty when undefined.
  std::optional<YawFix> yaw(const PlantState & s, FaceId believed_face, double filter_sigma)
  {
    double psi = 0.0;
    try {
      psi = yaw_from_rotation(s.orientation, believed_face);
    } catch (const GimbalDegenerate &) {
      return std::nullopt;
    }
    if (noise_.yaw_sigma > 0.0) {
      psi = wrap_angle(psi + noise_.yaw_sigma * n());
    }
    return YawFix{psi, filter_sigma, s.t};
  }

private:
  double n() { return normal_(rng_); }

  SensorNoise noise_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Eigen::Vector2d last_p_;
  Eigen::Vector2d last_v_{Eigen::Vector2d::Zero()};
  double last_psi_;
  double imu_psi_;  ///< yaw of the planar IMU frame, continuous across relabels
  double last_t_;
  double yaw_jump_{0.0};
};

/// Sensor streams draw from their own generator so feedback mode does not perturb the plant.
inline std::uint64_t sensor_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

/// Steps after a landing during which the estimated face may still lag the true one.
inline constexpr double kFaceSettleTime = 1.0;

inline Trace run_scenario(const Scenario & scn)
{
  scn.validate();
  const ReferenceTrajectory ref(scn.trajectory);
  const double dt = scn.run.dt;
  const long steps = scn.steps();
  const long ctrl_ratio = scn.control_ratio();
  const auto & ecfg = scn.estimator;
  const long imu_ratio = std::lround(1.0 / (ecfg.imu_rate * dt));
  const long uwb_ratio = std::lround(1.0 / (ecfg.uwb_rate * dt));
  const long yaw_ratio = std::lround(1.0 / (ecfg.yaw_rate * dt));

  ControllerConfig ccfg = scn.controller;
  ccfg.u_max = scn.geometry.u_max;

  PlantState st = PlantState::at_rest(scn.run.initial_pose, scn.run.initial_face);
  std::mt19937_64 plant_rng(scn.run.seed);
  SensorSuite sensors(st, ecfg.sensor_noise, sensor_seed(scn.run.seed));
  Eskf eskf(st.pose, 0.0, ecfg.imu, ecfg.init);
  FaceTracker tracker(st.face, ecfg.face_time_constant, ecfg.face_dwell);

  Trace trace;
  trace.scenario_id = scn.id;
  trace.seed = scn.run.seed;
  trace.u_max = ccfg.u_max;
  trace.rows.reserve(static_cast<std::size_t>(steps + 1));
  auto & diag = trace.diagnostics;
  diag.min_cov_eigenvalue = eskf.covariance().min_eigenvalue();

  std::vector<bool> fired(scn.events.size(), false);
  double airborne_until = 0.0;
  double settle_until = -1.0;
  bool reanchor_yaw = false;
  ControlOutput held;
  FaceId held_face = st.face;

  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    st.t = t;
    std::string event;
    auto mark = [&event](const char * what) { event += event.empty() ? what : std::string(";") + what; };

    if (st.airborne && t >= airborne_until - 1e-9) {
      st.airborne = false;
      settle_until = t + kFaceSettleTime;
      mark("land");
    }
    for (std::size_t i = 0; i < scn.events.size(); ++i) {
      const auto & ev = scn.events[i];
      if (fired[i] || st.airborne) {
        continue;
      }
      const bool due = ev.trigger == FlipEvent::Trigger::Time
                         ? t >= ev.time - 1e-9
                         : (st.pose.position() - ev.center).norm() <= ev.radius;
      if (!due) {
        continue;
      }
      fired[i] = true;
      const double psi_before = st.pose.psi;
      st = apply_flip(st, ev);
      sensors.note_yaw_jump(st.pose.psi - psi_before);
      mark("flip");
      if (st.airborne) {
        airborne_until = t + ev.fall_duration;
      } else {
        settle_until = t + kFaceSettleTime;
        mark("land");
      }
    }

    const bool truth_fb = scn.run.feedback == Feedback::Truth;
    const FaceId ctrl_face = truth_fb ? st.face : tracker.face();
    if (k % ctrl_ratio == 0) {
      const Pose fb = truth_fb ? st.pose : eskf.state().pose();
      std::vector<TrajectorySample> window;
      window.reserve(static_cast<std::size_t>(ccfg.horizon));
      for (int j = 0; j < std::max(1, ccfg.horizon); ++j) {
        window.push_back(ref.sample(t + j * ccfg.dt));
      }
      held = solve_mpc(fb, window, scn.geometry, ctrl_face, ccfg);
      held_face = ctrl_face;
      if (held.saturated && !st.airborne) {
        ++diag.saturated_steps;
      }
    }
    const WheelSpeeds u_plant = map_command(held.u, held_face, st.face);

    const bool transient = st.airborne || t < settle_until;
    const FaceDetection truth_face = classify_gravity(st.orientation.R.transpose() * Eigen::Vector3d(0, 0, -kGravity));
    if (!transient && (truth_face.face != st.face || ctrl_face != st.face)) {
      ++diag.face_consistency_violations;
    }

    TraceRow row;
    row.t = t;
    row.truth = st.pose;
    row.estimate = eskf.state().pose();
    row.reference = ref.sample(t).pose;
    row.u = u_plant;
    row.face = st.face;
    row.drive_wheels = drive_wheels_for_face(st.face);
    row.event = event;
    row.height = st.height_offset;
    const Eigen::Vector2d grad = scn.terrain.gradient(st.pose.x, st.pose.y);
    const double c = std::cos(st.pose.psi);
    const double s = std::sin(st.pose.psi);
    row.pitch = std::atan(grad.x() * c + grad.y() * s);
    row.roll = std::atan(-grad.x() * s + grad.y() * c);
    row.airborne = st.airborne;
    trace.rows.push_back(std::move(row));

    if (k == steps) {
      break;
    }

    BodyTwist applied;
    st = plant_step(st, u_plant, dt, scn.geometry, scn.slip, scn.terrain, plant_rng, &applied);
    if (scn.slip.is_zero() && scn.terrain.slip_gain == 0.0 && !st.airborne) {
      const Eigen::Vector3d fk = forward_kinematics(u_plant, scn.geometry, st.face).vector();
      diag.max_plant_fk_mismatch = std::max(diag.max_plant_fk_mismatch, (fk - applied.vector()).cwiseAbs().maxCoeff());
    }
    st.t = static_cast<double>(k + 1) * dt;

    const long kn = k + 1;
    if (kn % imu_ratio == 0) {
      const auto reading = sensors.imu(st);
      const FaceId before = tracker.face();
      tracker.update(reading.specific_force, imu_ratio * dt);
      eskf.process(reading.imu);
      if (tracker.face() != before) {
        eskf.inflate_yaw(ecfg.flip_inflation);
        reanchor_yaw = true;
      }
      const auto & p = eskf.covariance().P;
      diag.min_cov_eigenvalue = std::min(diag.min_cov_eigenvalue, eskf.covariance().min_eigenvalue());
      diag.max_cov_asymmetry = std::max(diag.max_cov_asymmetry, (p - p.transpose()).cwiseAbs().maxCoeff());
    }
    if (kn % uwb_ratio == 0) {
      const UwbFix fix = sensors.uwb(st, ecfg.uwb_sigma);
      diag.uwb_sq_error_sum += (fix.p_meas - st.pose.position()).squaredNorm();
      ++diag.uwb_fixes;
      eskf.process(fix);
    }
    const auto & detection = tracker.last_detection();
    if (ecfg.yaw_channel && kn % yaw_ratio == 0 && !st.airborne && detection.status == FaceStatus::Ok &&
        detection.face == tracker.face()) {
      if (const auto fix = sensors.yaw(st, tracker.face(), ecfg.yaw_sigma)) {
        if (reanchor_yaw) {
          eskf.reset_yaw(fix->psi_meas, fix->sigma);
          sensors.acknowledge_relabel(st);
          reanchor_yaw = false;
        } else {
          eskf.process(*fix);
        }
      }
    }
  }
  return trace;
}

}  // namespace curobot
