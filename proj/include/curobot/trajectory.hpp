#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "curobot/common.hpp"
#include "curobot/kinematics.hpp"
#include "curobot/trace.hpp"

namespace curobot
{

struct YawProfile
{
  enum class Kind { Fixed, Tangent, Rate };

  Kind kind{Kind::Fixed};
  double value{0.0};    ///< fixed yaw [rad] or yaw rate [rad/s]
  double initial{0.0};  ///< starting yaw of the rate profile [rad]

  static YawProfile fixed(double psi) { return {Kind::Fixed, psi, 0.0}; }
  static YawProfile tangent() { return {Kind::Tangent, 0.0, 0.0}; }
  static YawProfile rate(double psi_dot, double initial = 0.0) { return {Kind::Rate, psi_dot, initial}; }
};

inline const char * to_string(YawProfile::Kind k)
{
  switch (k) {
    case YawProfile::Kind::Fixed: return "fixed";
    case YawProfile::Kind::Tangent: return "tangent";
    case YawProfile::Kind::Rate: return "rate";
  }
  return "?";
}

enum class TrajectoryKind { Line, Circle, Eight };

inline const char * to_string(TrajectoryKind k)
{
  switch (k) {
    case TrajectoryKind::Line: return "line";
    case TrajectoryKind::Circle: return "circle";
    case TrajectoryKind::Eight: return "eight";
  }
  return "?";
}

/// Serializable parameters of a reference trajectory. Unused fields are ignored per kind.
struct TrajectoryDescriptor
{
  TrajectoryKind kind{TrajectoryKind::Line};
  double theta{0.0};   ///< line heading [rad]
  double length{8.0};  ///< line length [m]
  double speed{0.1};   ///< line speed [m/s]
  double radius{1.0};  ///< circle radius [m]
  double scale{1.5};   ///< eight half-height [m]
  double period{20.0 * kPi};  ///< circle / eight period [s]
  double duration{0.0};       ///< circle / eight duration [s]; 0 means one period
  bool clockwise{false};      ///< circle direction
  Eigen::Vector2d origin{0.0, 0.0};  ///< line start, circle center, eight crossing point
  YawProfile yaw{};
};

struct TrajectorySample
{
  Pose pose;
  BodyTwist twist{BodyTwist::world(0, 0, 0)};
};

/// Nominal path kinematics at one instant.
struct PathState
{
  Eigen::Vector2d p;
  Eigen::Vector2d v;
  Eigen::Vector2d a;
};

/**
 * @brief Time-parameterized reference pose with an exact feedforward twist.
 *
 * Line: constant-speed segment from `origin` at heading `theta`; the pose holds at the end.
 * Circle: counterclockwise unless `clockwise`, centered at `origin`, starting at angle 0.
 * Eight: Gerono lemniscate x = s sin(th) cos(th), y = s sin(th), th = 2 pi t / T, starting at
 * the crossing point. Its half-period symmetry is (x, y) -> (x, -y).
 */
class ReferenceTrajectory
{
public:
  explicit ReferenceTrajectory(TrajectoryDescriptor d) : desc_(std::move(d))
  {
    validate();
    build_path_samples();
  }

  static ReferenceTrajectory line(double theta, double length, double speed, YawProfile yaw)
  {
    TrajectoryDescriptor d;
    d.kind = TrajectoryKind::Line;
    d.theta = theta;
    d.length = length;
    d.speed = speed;
    d.yaw = yaw;
    return ReferenceTrajectory(d);
  }

  static ReferenceTrajectory circle(double radius, double period, YawProfile yaw, double duration = 0.0)
  {
    TrajectoryDescriptor d;
    d.kind = TrajectoryKind::Circle;
    d.radius = radius;
    d.period = period;
    d.duration = duration;
    d.yaw = yaw;
    return ReferenceTrajectory(d);
  }

  static ReferenceTrajectory eight(double scale, double period, YawProfile yaw, double duration = 0.0)
  {
    TrajectoryDescriptor d;
    d.kind = TrajectoryKind::Eight;
    d.scale = scale;
    d.period = period;
    d.duration = duration;
    d.yaw = yaw;
    return ReferenceTrajectory(d);
  }

  const TrajectoryDescriptor & descriptor() const { return desc_; }

  double duration() const
  {
    if (desc_.kind == TrajectoryKind::Line) {
      return desc_.length / desc_.speed;
    }
    return desc_.duration > 0.0 ? desc_.duration : desc_.period;
  }

  PathState path_state(double t) const
  {
    const auto & d = desc_;
    switch (d.kind) {
      case TrajectoryKind::Line: {
        const Eigen::Vector2d dir(std::cos(d.theta), std::sin(d.theta));
        const double tc = std::clamp(t, 0.0, duration());
        const bool moving = t >= 0.0 && t <= duration();
        return {d.origin + d.speed * tc * dir, moving ? Eigen::Vector2d(d.speed * dir) : Eigen::Vector2d::Zero(),
                Eigen::Vector2d::Zero()};
      }
      case TrajectoryKind::Circle: {
        const double w = (d.clockwise ? -kTwoPi : kTwoPi) / d.period;
        const double c = std::cos(w * t);
        const double s = std::sin(w * t);
        return {d.origin + d.radius * Eigen::Vector2d(c, s), d.radius * w * Eigen::Vector2d(-s, c),
                -d.radius * w * w * Eigen::Vector2d(c, s)};
      }
      case TrajectoryKind::Eight: {
        const double w = kTwoPi / d.period;
        const double th = w * t;
        const double sc = d.scale;
        return {d.origin + sc * Eigen::Vector2d(0.5 * std::sin(2 * th), std::sin(th)),
                sc * w * Eigen::Vector2d(std::cos(2 * th), std::cos(th)),
                -sc * w * w * Eigen::Vector2d(2 * std::sin(2 * th), std::sin(th))};
      }
    }
    return {};
  }

  TrajectorySample sample(double t) const
  {
    const PathState ps = path_state(t);
    TrajectorySample out;
    out.pose.x = ps.p.x();
    out.pose.y = ps.p.y();
    double psi = 0.0;
    double psi_dot = 0.0;
    switch (desc_.yaw.kind) {
      case YawProfile::Kind::Fixed:
        psi = desc_.yaw.value;
        break;
      case YawProfile::Kind::Tangent:
        if (desc_.kind == TrajectoryKind::Line) {
          psi = desc_.theta;
        } else {
          psi = std::atan2(ps.v.y(), ps.v.x());
          psi_dot = (ps.v.x() * ps.a.y() - ps.v.y() * ps.a.x()) / ps.v.squaredNorm();
        }
        break;
      case YawProfile::Kind::Rate: {
        const double tc = desc_.kind == TrajectoryKind::Line ? std::clamp(t, 0.0, duration()) : t;
        psi = desc_.yaw.initial + desc_.yaw.value * tc;
        const bool moving = desc_.kind != TrajectoryKind::Line || (t >= 0.0 && t <= duration());
        psi_dot = moving ? desc_.yaw.value : 0.0;
        break;
      }
    }
    out.pose.psi = wrap_angle(psi);
    out.twist = BodyTwist::world(ps.v.x(), ps.v.y(), psi_dot);
    return out;
  }

  /// Point on the geometric path; `s` in [0, 1] covers the whole path once.
  Eigen::Vector2d path_point(double s) const
  {
    const double span = desc_.kind == TrajectoryKind::Line ? duration() : desc_.period;
    return path_state(std::clamp(s, 0.0, 1.0) * span).p;
  }

  /// Perpendicular distance to the path: dense sampling then golden-section refinement.
  double distance_to_path(const Eigen::Vector2d & q) const
  {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const double d = (samples_[i] - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    const double n = static_cast<double>(samples_.size() - 1);
    double lo = static_cast<double>(best == 0 ? 0 : best - 1) / n;
    double hi = static_cast<double>(std::min(best + 1, samples_.size() - 1)) / n;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double s) { return (path_point(s) - q).squaredNorm(); };
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = f(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = f(x2);
      }
    }
    return std::sqrt(std::min({best_d, f1, f2, f(lo), f(hi)}));
  }

private:
  static constexpr std::size_t kPathSamples = 1000;

  void validate() const
  {
    const auto & d = desc_;
    auto positive = [](double v, const char * field) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(std::string("trajectory.") + field, "must be a finite value > 0");
      }
    };
    switch (d.kind) {
      case TrajectoryKind::Line:
        positive(d.length, "length");
        positive(d.speed, "speed");
        break;
      case TrajectoryKind::Circle:
        positive(d.radius, "radius");
        positive(d.period, "period");
        break;
      case TrajectoryKind::Eight:
        positive(d.scale, "scale");
        positive(d.period, "period");
        break;
    }
    if (d.duration < 0.0) {
      throw ValidationError("trajectory.duration", "must be >= 0");
    }
    if (d.yaw.kind == YawProfile::Kind::Tangent && d.kind != TrajectoryKind::Line) {
      const double span = d.period;
      for (int i = 0; i <= 4000; ++i) {
        if (path_state(span * i / 4000.0).v.norm() < 1e-9) {
          throw ValidationError("trajectory.yaw", "tangent yaw needs nonzero planar speed");
        }
      }
    }
  }

  void build_path_samples()
  {
    samples_.resize(kPathSamples);
    for (std::size_t i = 0; i < kPathSamples; ++i) {
      samples_[i] = path_point(static_cast<double>(i) / static_cast<double>(kPathSamples - 1));
    }
  }

  TrajectoryDescriptor desc_;
  std::vector<Eigen::Vector2d> samples_;
};

struct TrackingMetrics
{
  double e_p{0.0};  ///< mean distance to the time-indexed reference point [m]
  double e_d{0.0};  ///< mean perpendicular distance to the reference path [m]
  double e_y{0.0};  ///< mean absolute yaw error [rad]
  double e_p_max{0.0};
  double e_d_max{0.0};
  double e_y_max{0.0};
};

inline TrackingMetrics compute_metrics(const Trace & trace, const ReferenceTrajectory & ref)
{
  if (trace.rows.empty()) {
    throw InvalidArgument("compute_metrics: empty trace");
  }
  TrackingMetrics m;
  for (const auto & row : trace.rows) {
    if (row.t > ref.duration() + 1e-9 || row.t < -1e-9) {
      throw InvalidArgument("compute_metrics: sample at t=" + std::to_string(row.t) +
                            " outside the reference duration");
    }
    const auto r = ref.sample(row.t);
    const Eigen::Vector2d pos = row.truth.position();
    const double ep = (pos - r.pose.position()).norm();
    const double ed = std::min(ref.distance_to_path(pos), ep);
    const double ey = std::abs(wrap_angle(row.truth.psi - r.pose.psi));
    m.e_p += ep;
    m.e_d += ed;
    m.e_y += ey;
    m.e_p_max = std::max(m.e_p_max, ep);
    m.e_d_max = std::max(m.e_d_max, ed);
    m.e_y_max = std::max(m.e_y_max, ey);
  }
  const double n = static_cast<double>(trace.rows.size());
  m.e_p /= n;
  m.e_d /= n;
  m.e_y /= n;
  return m;
}

/**
 * First time after which the distance to the time-indexed reference stays below
 * `threshold` for the rest of the trace. The crossing is interpolated linearly between
 * the last violating sample and the next one. Returns nullopt if never caught.
 */
inline std::optional<double> catch_up_time(const Trace & trace, const ReferenceTrajectory & ref, double threshold)
{
  if (!(threshold > 0.0)) {
    throw InvalidArgument("catch_up_time: threshold must be > 0");
  }
  if (trace.rows.empty()) {
    return std::nullopt;
  }
  std::vector<double> dist(trace.rows.size());
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    dist[i] = (trace.rows[i].truth.position() - ref.sample(trace.rows[i].t).pose.position()).norm();
  }
  std::optional<std::size_t> last_violation;
  for (std::size_t i = dist.size(); i-- > 0;) {
    if (dist[i] >= threshold) {
      last_violation = i;
      break;
    }
  }
  if (!last_violation) {
    return trace.rows.front().t;
  }
  const std::size_t a = *last_violation;
  if (a + 1 >= dist.size()) {
    return std::nullopt;
  }
  const double ta = trace.rows[a].t;
  const double tb = trace.rows[a + 1].t;
  const double frac = (dist[a] - threshold) / (dist[a] - dist[a + 1]);
  return ta + frac * (tb - ta);
}

}  // namespace curobot
