#pragma once

#include <string>
#include <vector>

#include "curobot/scenario.hpp"

namespace curobot
{

namespace presets
{

inline Scenario circle(const std::string & id, YawProfile yaw)
{
  Scenario s;
  s.id = id;
  s.trajectory.kind = TrajectoryKind::Circle;
  s.trajectory.radius = 1.0;
  s.trajectory.period = 20.0 * kPi;
  s.trajectory.duration = 100.0;
  s.trajectory.yaw = yaw;
  s.run.duration = 100.0;
  return s;
}

inline Scenario eight(const std::string & id)
{
  Scenario s;
  s.id = id;
  s.trajectory.kind = TrajectoryKind::Eight;
  s.trajectory.scale = 1.5;
  s.trajectory.period = 50.0;
  s.trajectory.yaw = YawProfile::tangent();
  s.run.initial_pose = Pose{0.0, 0.0, kPi / 4.0};
  return s;
}

/// One tip-over onto the back face while driving forward.
inline Scenario tumble()
{
  Scenario s;
  s.id = "tumble";
  s.trajectory.kind = TrajectoryKind::Line;
  s.trajectory.theta = 0.0;
  s.trajectory.length = 1.0;
  s.trajectory.speed = 0.1;
  s.trajectory.yaw = YawProfile::fixed(0.0);
  s.run.duration = 10.0;
  FlipEvent flip;
  flip.time = 4.2;
  flip.axis = {0.0, 1.0, 0.0};
  flip.angle_deg = -90.0;
  s.events.push_back(flip);
  return s;
}

inline Scenario line_sweep(double theta_deg = 0.0)
{
  Scenario s;
  s.id = "line_sweep";
  s.trajectory.kind = TrajectoryKind::Line;
  s.trajectory.theta = deg_to_rad(theta_deg);
  s.trajectory.length = 8.0;
  s.trajectory.speed = 0.1;
  s.trajectory.yaw = YawProfile::fixed(0.0);
  s.slip.wheel_sigma = 0.2;
  s.run.duration = 80.0;
  return s;
}

inline Scenario circle_fixed_yaw() { return circle("circle_fixed_yaw", YawProfile::fixed(0.0)); }
inline Scenario circle_tangent_yaw() { return circle("circle_tangent_yaw", YawProfile::tangent()); }
inline Scenario circle_rate_yaw() { return circle("circle_rate_yaw", YawProfile::rate(0.1)); }

inline Scenario eight_bumpy()
{
  Scenario s = eight("eight_bumpy");
  s.trajectory.duration = 100.0;
  s.run.duration = 100.0;
  s.terrain.kind = Terrain::Kind::Bumps;
  s.terrain.amplitude = 0.05;
  s.terrain.wavelength = 1.0;
  s.terrain.slip_gain = 0.2;
  s.slip.twist_sigma = 0.02;
  return s;
}

/// Figure-eight with two forward tip-overs: face 1 -> 6 -> 3.
inline Scenario flip_eight()
{
  Scenario s = eight("flip_eight");
  s.trajectory.duration = 100.0;
  s.run.duration = 100.0;
  // The second flip lands at the crossing point, where the path speed peaks.
  for (double t : {10.0, 75.0}) {
    FlipEvent flip;
    flip.time = t;
    flip.axis = {0.0, 1.0, 0.0};
    flip.angle_deg = 90.0;
    s.events.push_back(flip);
  }
  return s;
}

/// Clockwise 2 m diameter circle at fixed yaw, fed back through the estimator.
inline Scenario prototype_circle()
{
  Scenario s = circle("prototype_circle", YawProfile::fixed(0.0));
  s.trajectory.clockwise = true;
  s.run.initial_pose = Pose{1.0, 0.0, 0.0};
  s.run.feedback = Feedback::Estimator;
  s.slip.twist_sigma = 0.05;
  return s;
}

}  // namespace presets

inline std::vector<Scenario> builtin_presets()
{
  return {presets::tumble(),           presets::line_sweep(),         presets::circle_fixed_yaw(),
          presets::circle_tangent_yaw(), presets::circle_rate_yaw(),    presets::eight_bumpy(),
          presets::flip_eight(),         presets::prototype_circle()};
}

}  // namespace curobot
