#include <random>

#include <gtest/gtest.h>

#include "curobot/trajectory.hpp"

using namespace curobot;

namespace
{

Trace trace_from(const std::vector<std::pair<double, Pose>> & samples)
{
  Trace tr;
  for (const auto & [t, p] : samples) {
    TraceRow row;
    row.t = t;
    row.truth = p;
    tr.rows.push_back(row);
  }
  return tr;
}

void check_feedforward(const ReferenceTrajectory & ref, double speed_scale, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  const double h = 1e-4;
  std::uniform_real_distribution<double> ut(2 * h, ref.duration() - 2 * h);
  for (int i = 0; i < 100; ++i) {
    const double t = ut(rng);
    const auto a = ref.sample(t - h);
    const auto b = ref.sample(t + h);
    const auto s = ref.sample(t);
    EXPECT_NEAR((b.pose.x - a.pose.x) / (2 * h), s.twist.vx, 1e-6 * speed_scale);
    EXPECT_NEAR((b.pose.y - a.pose.y) / (2 * h), s.twist.vy, 1e-6 * speed_scale);
    EXPECT_NEAR(wrap_angle(b.pose.psi - a.pose.psi) / (2 * h), s.twist.omega, 1e-6 * std::max(1.0, speed_scale));
    EXPECT_EQ(s.twist.frame, Frame::World);
  }
}

}  // namespace

TEST(Trajectory, LineSamples)
{
  const auto ref = ReferenceTrajectory::line(0.0, 8.0, 0.1, YawProfile::fixed(0.0));
  EXPECT_DOUBLE_EQ(ref.duration(), 80.0);
  const auto s = ref.sample(40.0);
  EXPECT_NEAR(s.pose.x, 4.0, 1e-12);
  EXPECT_NEAR(s.pose.y, 0.0, 1e-12);
  EXPECT_NEAR(s.pose.psi, 0.0, 1e-12);
  EXPECT_NEAR(s.twist.vx, 0.1, 1e-12);
  EXPECT_NEAR(s.twist.vy, 0.0, 1e-12);
  const auto s0 = ref.sample(0.0);
  EXPECT_EQ(s0.pose.x, 0.0);
  EXPECT_EQ(s0.pose.y, 0.0);

  const auto diag = ReferenceTrajectory::line(deg_to_rad(45), 8.0, 0.1, YawProfile::fixed(0.0));
  const auto d = diag.sample(12.3);
  EXPECT_NEAR(d.twist.vx, 0.0707, 1e-4);
  EXPECT_NEAR(d.twist.vx, d.twist.vy, 1e-15);
}

TEST(Trajectory, LineHoldsAtEnd)
{
  const auto ref = ReferenceTrajectory::line(0.3, 2.0, 0.5, YawProfile::fixed(0.0));
  const auto s = ref.sample(100.0);
  EXPECT_NEAR(s.pose.position().norm(), 2.0, 1e-12);
  EXPECT_EQ(s.twist.vx, 0.0);
}

TEST(Trajectory, InvalidParameters)
{
  EXPECT_THROW(ReferenceTrajectory::line(0, 8, 0.0, YawProfile::fixed(0)), ValidationError);
  EXPECT_THROW(ReferenceTrajectory::line(0, -1, 0.1, YawProfile::fixed(0)), ValidationError);
  EXPECT_THROW(ReferenceTrajectory::circle(0, 10, YawProfile::fixed(0)), ValidationError);
  EXPECT_THROW(ReferenceTrajectory::circle(1, 0, YawProfile::fixed(0)), ValidationError);
  EXPECT_THROW(ReferenceTrajectory::eight(1, -2, YawProfile::tangent()), ValidationError);
}

TEST(Trajectory, CircleRates)
{
  const auto ref = ReferenceTrajectory::circle(1.0, 20 * kPi, YawProfile::rate(0.1), 100.0);
  EXPECT_DOUBLE_EQ(ref.duration(), 100.0);
  for (double t : {0.0, 13.0, 77.7}) {
    const auto s = ref.sample(t);
    EXPECT_NEAR(std::hypot(s.twist.vx, s.twist.vy), 0.1, 1e-12);
    EXPECT_NEAR(s.pose.psi, wrap_angle(0.1 * t), 1e-12);
    EXPECT_NEAR(s.twist.omega, 0.1, 1e-15);
  }
  const auto a = ref.sample(0.0);
  const auto b = ref.sample(20 * kPi);
  EXPECT_NEAR(a.pose.x, b.pose.x, 1e-12);
  EXPECT_NEAR(a.pose.y, b.pose.y, 1e-12);
}

TEST(Trajectory, CircleTangentYawRate)
{
  const auto ref = ReferenceTrajectory::circle(1.0, 20 * kPi, YawProfile::tangent(), 100.0);
  EXPECT_NEAR(ref.sample(0).pose.psi, kPi / 2, 1e-12);
  EXPECT_NEAR(ref.sample(5).twist.omega, 0.1, 1e-12);
}

TEST(Trajectory, EightShape)
{
  const double period = 60.0;
  const auto ref = ReferenceTrajectory::eight(1.5, period, YawProfile::tangent());
  const auto s0 = ref.sample(0.0);
  const auto s1 = ref.sample(period);
  EXPECT_NEAR(s0.pose.x, 0.0, 1e-12);
  EXPECT_NEAR(s0.pose.y, 0.0, 1e-12);
  EXPECT_NEAR(s1.pose.x, 0.0, 1e-12);
  EXPECT_NEAR(s1.pose.y, 0.0, 1e-12);
  // Crossing point visited again at half period.
  EXPECT_NEAR(ref.sample(period / 2).pose.position().norm(), 0.0, 1e-12);
  // Tangent yaw where the vertical velocity vanishes (th = pi/2).
  const auto top = ref.sample(period / 4);
  EXPECT_NEAR(top.twist.vy, 0.0, 1e-12);
  EXPECT_NEAR(std::abs(top.pose.psi), kPi, 1e-9);
  // Half-period reflection across the x axis.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ut(0, period / 2);
  for (int i = 0; i < 100; ++i) {
    const double t = ut(rng);
    const auto a = ref.sample(t);
    const auto b = ref.sample(t + period / 2);
    EXPECT_NEAR(b.pose.x, a.pose.x, 1e-12);
    EXPECT_NEAR(b.pose.y, -a.pose.y, 1e-12);
  }
}

TEST(Trajectory, FeedforwardMatchesFiniteDifferences)
{
  check_feedforward(ReferenceTrajectory::line(0.4, 8, 0.1, YawProfile::fixed(0)), 0.1, 1);
  check_feedforward(ReferenceTrajectory::line(0.4, 8, 0.1, YawProfile::rate(0.05)), 0.1, 2);
  check_feedforward(ReferenceTrajectory::circle(1, 20 * kPi, YawProfile::fixed(0.2), 100), 0.1, 3);
  check_feedforward(ReferenceTrajectory::circle(1, 20 * kPi, YawProfile::tangent(), 100), 0.1, 4);
  check_feedforward(ReferenceTrajectory::circle(1, 20 * kPi, YawProfile::rate(0.1), 100), 0.1, 5);
  check_feedforward(ReferenceTrajectory::eight(1.5, 60, YawProfile::tangent(), 150), 0.25, 6);
  auto cw = TrajectoryDescriptor{};
  cw.kind = TrajectoryKind::Circle;
  cw.clockwise = true;
  cw.duration = 100;
  cw.yaw = YawProfile::tangent();
  check_feedforward(ReferenceTrajectory(cw), 0.1, 8);
  EXPECT_LT(ReferenceTrajectory(cw).sample(1.0).pose.y, 0.0);
  check_feedforward(ReferenceTrajectory::eight(1.5, 60, YawProfile::fixed(0), 150), 0.25, 7);
}

TEST(Trajectory, PathDistance)
{
  const auto circle = ReferenceTrajectory::circle(1.0, 20 * kPi, YawProfile::fixed(0));
  EXPECT_NEAR(circle.distance_to_path({0.0, 0.0}), 1.0, 1e-4);
  EXPECT_NEAR(circle.distance_to_path({1.3 * std::cos(0.77), 1.3 * std::sin(0.77)}), 0.3, 1e-4);
  const auto line = ReferenceTrajectory::line(0.0, 8, 0.1, YawProfile::fixed(0));
  EXPECT_NEAR(line.distance_to_path({3.3333, 0.05}), 0.05, 1e-9);
  EXPECT_NEAR(line.distance_to_path({-1.0, 0.0}), 1.0, 1e-9);
  // Lemniscate: compare with brute-force dense sampling.
  const auto eight = ReferenceTrajectory::eight(1.5, 60, YawProfile::tangent());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d q(u(rng), 1.6 * u(rng));
    double brute = 1e9;
    for (int k = 0; k <= 200000; ++k) {
      brute = std::min(brute, (eight.path_point(k / 200000.0) - q).norm());
    }
    EXPECT_NEAR(eight.distance_to_path(q), brute, 1e-4);
  }
}

TEST(Trajectory, MetricsPerfectTracking)
{
  const auto ref = ReferenceTrajectory::circle(1.0, 20 * kPi, YawProfile::tangent(), 100);
  std::vector<std::pair<double, Pose>> s;
  for (int i = 0; i <= 1000; ++i) {
    s.emplace_back(i * 0.1, ref.sample(i * 0.1).pose);
  }
  const auto m = compute_metrics(trace_from(s), ref);
  EXPECT_NEAR(m.e_p, 0.0, 1e-12);
  EXPECT_NEAR(m.e_d, 0.0, 1e-6);
  EXPECT_NEAR(m.e_y, 0.0, 1e-12);
}

TEST(Trajectory, MetricsAlongTrackLag)
{
  const auto ref = ReferenceTrajectory::line(0.3, 8, 0.1, YawProfile::fixed(0.3));
  const double lag = 2.0;
  std::vector<std::pair<double, Pose>> s;
  for (int i = 0; i <= 600; ++i) {
    const double t = lag + i * 0.1;
    s.emplace_back(t, ref.sample(t - lag).pose);
  }
  const auto m = compute_metrics(trace_from(s), ref);
  EXPECT_NEAR(m.e_d, 0.0, 1e-9);
  EXPECT_NEAR(m.e_p, 0.1 * lag, 1e-9);
  EXPECT_NEAR(m.e_y, 0.0, 1e-12);
}

TEST(Trajectory, MetricsLateralOffset)
{
  const auto ref = ReferenceTrajectory::line(0.0, 8, 0.1, YawProfile::fixed(0));
  std::vector<std::pair<double, Pose>> s;
  for (int i = 0; i <= 800; ++i) {
    auto p = ref.sample(i * 0.1).pose;
    p.y += 0.05;
    s.emplace_back(i * 0.1, p);
  }
  const auto m = compute_metrics(trace_from(s), ref);
  EXPECT_NEAR(m.e_d, 0.05, 1e-9);
  EXPECT_NEAR(m.e_p, 0.05, 1e-9);
}

TEST(Trajectory, MetricsTranslationInvariant)
{
  auto d = TrajectoryDescriptor{};
  d.kind = TrajectoryKind::Eight;
  d.period = 60;
  d.yaw = YawProfile::tangent();
  const ReferenceTrajectory ref(d);
  d.origin = {3.0, -2.0};
  const ReferenceTrajectory moved(d);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 0.05);
  std::vector<std::pair<double, Pose>> a, b;
  for (int i = 0; i <= 600; ++i) {
    auto p = ref.sample(i * 0.1).pose;
    p.x += n(rng);
    p.y += n(rng);
    p.psi += n(rng);
    a.emplace_back(i * 0.1, p);
    p.x += 3.0;
    p.y -= 2.0;
    b.emplace_back(i * 0.1, p);
  }
  const auto ma = compute_metrics(trace_from(a), ref);
  const auto mb = compute_metrics(trace_from(b), moved);
  EXPECT_NEAR(ma.e_p, mb.e_p, 1e-9);
  EXPECT_NEAR(ma.e_d, mb.e_d, 1e-6);
  EXPECT_NEAR(ma.e_y, mb.e_y, 1e-12);
  EXPECT_LE(ma.e_d, ma.e_p);
}

TEST(Trajectory, MetricsRejectEmptyOrOutOfRange)
{
  const auto ref = ReferenceTrajectory::line(0.0, 8, 0.1, YawProfile::fixed(0));
  EXPECT_THROW(compute_metrics(Trace{}, ref), InvalidArgument);
  EXPECT_THROW(compute_metrics(trace_from({{81.0, Pose{}}}), ref), InvalidArgument);
}

TEST(Trajectory, CatchUp)
{
  const auto ref = ReferenceTrajectory::line(0.0, 8, 0.1, YawProfile::fixed(0));
  std::vector<std::pair<double, Pose>> on, converging, diverging;
  for (int i = 0; i <= 200; ++i) {
    const double t = i * 0.1;
    const auto p = ref.sample(t).pose;
    on.emplace_back(t, p);
    // Synthetic oracle: lateral gap shrinking linearly, 0.2 m exactly at t = 8.4.
    auto c = p;
    c.y += std::max(0.0, 0.5 - 0.3 * t / 8.4);
    converging.emplace_back(t, c);
    auto d = p;
    d.y += 0.01 * t;
    diverging.emplace_back(t, d);
  }
  EXPECT_DOUBLE_EQ(*catch_up_time(trace_from(on), ref, 0.2), 0.0);
  EXPECT_NEAR(*catch_up_time(trace_from(converging), ref, 0.2), 8.4, 1e-9);
  EXPECT_FALSE(catch_up_time(trace_from(diverging), ref, 0.2).has_value());
  EXPECT_THROW(catch_up_time(trace_from(on), ref, 0.0), InvalidArgument);
}
