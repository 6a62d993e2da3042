#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "curobot/scenario.hpp"
#include "curobot/trace.hpp"
#include "curobot/trajectory.hpp"

namespace curobot
{

using json = nlohmann::ordered_json;

namespace detail
{

/// Typed, path-aware access to one JSON object; reports unknown keys on `finish`.
class ObjectReader
{
public:
  ObjectReader(const json & j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object()) {
      throw ValidationError(path_.empty() ? "<root>" : path_, "must be an object");
    }
  }

  std::string field(const std::string & key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string & key) const { return j_.contains(key); }

  const json & raw(const std::string & key)
  {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string & key, double fallback)
  {
    if (!has(key)) {
      return fallback;
    }
    const json & v = raw(key);
    if (!v.is_number()) {
      throw ValidationError(field(key), "must be a number");
    }
    return v.get<double>();
  }

  long integer(const std::string & key, long fallback)
  {
    if (!has(key)) {
      return fallback;
    }
    const json & v = raw(key);
    if (!v.is_number_integer()) {
      throw ValidationError(field(key), "must be an integer");
    }
    return v.get<long>();
  }

  std::uint64_t unsigned_integer(const std::string & key, std::uint64_t fallback)
  {
    if (!has(key)) {
      return fallback;
    }
    const json & v = raw(key);
    if (!v.is_number_unsigned()) {
      throw ValidationError(field(key), "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string & key, bool fallback)
  {
    if (!has(key)) {
      return fallback;
    }
    const json & v = raw(key);
    if (!v.is_boolean()) {
      throw ValidationError(field(key), "must be true or false");
    }
    return v.get<bool>();
  }

  std::string string(const std::string & key, const std::string & fallback)
  {
    if (!has(key)) {
      return fallback;
    }
    const json & v = raw(key);
    if (!v.is_string()) {
      throw ValidationError(field(key), "must be a string");
    }
    return v.get<std::string>();
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vector(const std::string & key, const Eigen::Matrix<double, N, 1> & fallback)
  {
    if (!has(key)) {
      return fallback;
    }
    const json & v = raw(key);
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N)) {
      throw ValidationError(field(key), "must be an array of " + std::to_string(N) + " numbers");
    }
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
      if (!v[static_cast<std::size_t>(i)].is_number()) {
        throw ValidationError(field(key) + "[" + std::to_string(i) + "]", "must be a number");
      }
      out(i) = v[static_cast<std::size_t>(i)].get<double>();
    }
    return out;
  }

  template <typename Enum>
  Enum choice(const std::string & key, Enum fallback, std::initializer_list<std::pair<const char *, Enum>> options)
  {
    if (!has(key)) {
      return fallback;
    }
    const std::string s = string(key, "");
    std::string allowed;
    for (const auto & [name, value] : options) {
      if (s == name) {
        return value;
      }
      allowed += allowed.empty() ? name : std::string("|") + name;
    }
    throw ValidationError(field(key), "must be one of " + allowed + ", got \"" + s + "\"");
  }

  std::optional<ObjectReader> child(const std::string & key)
  {
    if (!has(key)) {
      return std::nullopt;
    }
    return ObjectReader(raw(key), field(key));
  }

  void finish() const
  {
    for (const auto & item : j_.items()) {
      if (seen_.count(item.key()) == 0) {
        throw ValidationError(field(item.key()), "unknown key");
      }
    }
  }

private:
  const json & j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline json vec_json(const Eigen::VectorXd & v)
{
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v(i));
  }
  return a;
}

inline void read_geometry(ObjectReader r, CubeGeometry & g)
{
  g.half_edge = r.number("half_edge", g.half_edge);
  g.contact_offset_b = r.number("contact_offset_b", g.contact_offset_b);
  g.r_e = r.number("r_e", g.r_e);
  g.alpha = r.number("alpha", g.alpha);
  g.u_max = r.number("u_max", g.u_max);
  r.finish();
}

inline void read_trajectory(ObjectReader r, TrajectoryDescriptor & d)
{
  d.kind = r.choice("kind", d.kind,
                    {{"line", TrajectoryKind::Line}, {"circle", TrajectoryKind::Circle}, {"eight", TrajectoryKind::Eight}});
  d.theta = deg_to_rad(r.number("theta_deg", rad_to_deg(d.theta)));
  d.length = r.number("length", d.length);
  d.speed = r.number("speed", d.speed);
  d.radius = r.number("radius", d.radius);
  d.scale = r.number("scale", d.scale);
  d.period = r.number("period", d.period);
  d.duration = r.number("duration", d.duration);
  d.clockwise = r.boolean("clockwise", d.clockwise);
  d.origin = r.vector<2>("origin", d.origin);
  if (auto y = r.child("yaw")) {
    d.yaw.kind = y->choice("profile", d.yaw.kind,
                           {{"fixed", YawProfile::Kind::Fixed},
                            {"tangent", YawProfile::Kind::Tangent},
                            {"rate", YawProfile::Kind::Rate}});
    switch (d.yaw.kind) {
      case YawProfile::Kind::Fixed: d.yaw.value = y->number("psi", 0.0); break;
      case YawProfile::Kind::Rate:
        d.yaw.value = y->number("rate", 0.0);
        d.yaw.initial = y->number("initial", 0.0);
        break;
      case YawProfile::Kind::Tangent: break;
    }
    y->finish();
  }
  r.finish();
}

inline void read_controller(ObjectReader r, ControllerConfig & c)
{
  c.mode = r.choice("mode", c.mode, {{"mpc", ControllerMode::Mpc}, {"pid", ControllerMode::Pid}});
  c.horizon = static_cast<int>(r.integer("horizon", c.horizon));
  c.dt = r.number("dt", c.dt);
  c.Q = r.vector<3>("q", c.Q.diagonal()).asDiagonal();
  c.R = r.vector<4>("r", c.R.diagonal()).asDiagonal();
  c.diff_weight = r.number("diff_weight", c.diff_weight);
  c.cross_sign = r.number("cross_sign", c.cross_sign);
  c.Kp = r.vector<3>("kp", c.Kp.diagonal()).asDiagonal();
  r.finish();
}

inline void read_estimator(ObjectReader r, EstimatorConfig & e)
{
  e.imu.accel_sigma = r.number("accel_sigma", e.imu.accel_sigma);
  e.imu.gyro_sigma = r.number("gyro_sigma", e.imu.gyro_sigma);
  e.uwb_sigma = r.number("uwb_sigma", e.uwb_sigma);
  e.yaw_sigma = r.number("yaw_sigma", e.yaw_sigma);
  e.imu_rate = r.number("imu_rate", e.imu_rate);
  e.uwb_rate = r.number("uwb_rate", e.uwb_rate);
  e.yaw_rate = r.number("yaw_rate", e.yaw_rate);
  e.yaw_channel = r.boolean("yaw_channel", e.yaw_channel);
  e.flip_inflation = r.number("flip_inflation", e.flip_inflation);
  e.face_time_constant = r.number("face_time_constant", e.face_time_constant);
  e.face_dwell = r.number("face_dwell", e.face_dwell);
  if (auto i = r.child("init")) {
    e.init.p_sigma = i->number("p_sigma", e.init.p_sigma);
    e.init.v_sigma = i->number("v_sigma", e.init.v_sigma);
    e.init.psi_sigma = i->number("psi_sigma", e.init.psi_sigma);
    i->finish();
  }
  if (auto n = r.child("sensor_noise")) {
    e.sensor_noise.accel_sigma = n->number("accel_sigma", e.sensor_noise.accel_sigma);
    e.sensor_noise.gyro_sigma = n->number("gyro_sigma", e.sensor_noise.gyro_sigma);
    e.sensor_noise.uwb_sigma = n->number("uwb_sigma", e.sensor_noise.uwb_sigma);
    e.sensor_noise.yaw_sigma = n->number("yaw_sigma", e.sensor_noise.yaw_sigma);
    n->finish();
  }
  r.finish();
}

inline FlipEvent read_event(ObjectReader r)
{
  FlipEvent ev;
  const std::string type = r.string("type", "flip");
  if (type != "flip") {
    throw ValidationError(r.field("type"), "must be \"flip\"");
  }
  ev.trigger = r.choice("trigger", ev.trigger,
                        {{"time", FlipEvent::Trigger::Time}, {"region", FlipEvent::Trigger::Region}});
  ev.time = r.number("time", ev.time);
  ev.center = r.vector<2>("center", ev.center);
  ev.radius = r.number("radius", ev.radius);
  ev.axis = r.vector<3>("axis", ev.axis);
  ev.axis_frame = r.choice("axis_frame", ev.axis_frame, {{"body", Frame::Body}, {"world", Frame::World}});
  ev.angle_deg = r.number("angle_deg", ev.angle_deg);
  ev.fall_duration = r.number("fall_duration", ev.fall_duration);
  r.finish();
  return ev;
}

}  // namespace detail

/// Parses a scenario document; every key is optional and unknown keys are rejected.
inline Scenario scenario_from_json(const json & j, const std::string & default_id = "scenario")
{
  detail::ObjectReader r(j, "");
  Scenario s;
  s.id = r.string("id", default_id);
  if (auto g = r.child("geometry")) {
    detail::read_geometry(*g, s.geometry);
  }
  if (auto t = r.child("trajectory")) {
    detail::read_trajectory(*t, s.trajectory);
  }
  if (auto c = r.child("controller")) {
    detail::read_controller(*c, s.controller);
  }
  if (auto e = r.child("estimator")) {
    detail::read_estimator(*e, s.estimator);
  }
  if (auto sl = r.child("slip")) {
    s.slip.wheel_sigma = sl->number("wheel_sigma", s.slip.wheel_sigma);
    s.slip.twist_sigma = sl->number("twist_sigma", s.slip.twist_sigma);
    s.slip.drift_sigma = sl->number("drift_sigma", s.slip.drift_sigma);
    sl->finish();
  }
  if (r.has("events")) {
    const json & evs = r.raw("events");
    if (!evs.is_array()) {
      throw ValidationError("events", "must be an array");
    }
    for (std::size_t i = 0; i < evs.size(); ++i) {
      s.events.push_back(detail::read_event(detail::ObjectReader(evs[i], "events[" + std::to_string(i) + "]")));
    }
  }
  if (auto te = r.child("terrain")) {
    s.terrain.kind = te->choice("kind", s.terrain.kind, {{"flat", Terrain::Kind::Flat}, {"bumps", Terrain::Kind::Bumps}});
    s.terrain.amplitude = te->number("amplitude", s.terrain.amplitude);
    s.terrain.wavelength = te->number("wavelength", s.terrain.wavelength);
    s.terrain.slip_gain = te->number("slip_gain", s.terrain.slip_gain);
    te->finish();
  }
  if (auto ru = r.child("run")) {
    s.run.duration = ru->number("duration", s.run.duration);
    s.run.dt = ru->number("dt", s.run.dt);
    s.run.seed = ru->unsigned_integer("seed", s.run.seed);
    s.run.feedback = ru->choice("feedback", s.run.feedback,
                                {{"truth", Feedback::Truth}, {"estimator", Feedback::Estimator}});
    if (auto p = ru->child("initial_pose")) {
      s.run.initial_pose.x = p->number("x", 0.0);
      s.run.initial_pose.y = p->number("y", 0.0);
      s.run.initial_pose.psi = p->number("psi", 0.0);
      p->finish();
    }
    const long face = ru->integer("initial_face", to_int(s.run.initial_face));
    if (face < 1 || face > 6) {
      throw ValidationError(ru->field("initial_face"), "must be in 1..6");
    }
    s.run.initial_face = face_from_int(static_cast<int>(face));
    ru->finish();
  }
  r.finish();
  return s;
}

/// Fully populated document: the normalized effective configuration.
inline json scenario_to_json(const Scenario & s)
{
  using detail::vec_json;
  json j;
  j["id"] = s.id;
  j["geometry"] = {{"half_edge", s.geometry.half_edge},
                   {"contact_offset_b", s.geometry.contact_offset_b},
                   {"r_e", s.geometry.r_e},
                   {"alpha", s.geometry.alpha},
                   {"u_max", s.geometry.u_max}};

  const auto & d = s.trajectory;
  json yaw = {{"profile", to_string(d.yaw.kind)}};
  if (d.yaw.kind == YawProfile::Kind::Fixed) {
    yaw["psi"] = d.yaw.value;
  } else if (d.yaw.kind == YawProfile::Kind::Rate) {
    yaw["rate"] = d.yaw.value;
    yaw["initial"] = d.yaw.initial;
  }
  json traj = {{"kind", to_string(d.kind)}};
  if (d.kind == TrajectoryKind::Line) {
    traj["theta_deg"] = rad_to_deg(d.theta);
    traj["length"] = d.length;
    traj["speed"] = d.speed;
  } else {
    if (d.kind == TrajectoryKind::Circle) {
      traj["radius"] = d.radius;
      traj["clockwise"] = d.clockwise;
    } else {
      traj["scale"] = d.scale;
    }
    traj["period"] = d.period;
    traj["duration"] = d.duration;
  }
  traj["origin"] = vec_json(d.origin);
  traj["yaw"] = yaw;
  j["trajectory"] = traj;

  const auto & c = s.controller;
  j["controller"] = {{"mode", to_string(c.mode)},
                     {"horizon", c.horizon},
                     {"dt", c.dt},
                     {"q", vec_json(c.Q.diagonal())},
                     {"r", vec_json(c.R.diagonal())},
                     {"diff_weight", c.diff_weight},
                     {"cross_sign", c.cross_sign},
                     {"kp", vec_json(c.Kp.diagonal())}};

  const auto & e = s.estimator;
  j["estimator"] = {{"accel_sigma", e.imu.accel_sigma},
                    {"gyro_sigma", e.imu.gyro_sigma},
                    {"uwb_sigma", e.uwb_sigma},
                    {"yaw_sigma", e.yaw_sigma},
                    {"imu_rate", e.imu_rate},
                    {"uwb_rate", e.uwb_rate},
                    {"yaw_rate", e.yaw_rate},
                    {"yaw_channel", e.yaw_channel},
                    {"flip_inflation", e.flip_inflation},
                    {"face_time_constant", e.face_time_constant},
                    {"face_dwell", e.face_dwell},
                    {"init", {{"p_sigma", e.init.p_sigma}, {"v_sigma", e.init.v_sigma}, {"psi_sigma", e.init.psi_sigma}}},
                    {"sensor_noise",
                     {{"accel_sigma", e.sensor_noise.accel_sigma},
                      {"gyro_sigma", e.sensor_noise.gyro_sigma},
                      {"uwb_sigma", e.sensor_noise.uwb_sigma},
                      {"yaw_sigma", e.sensor_noise.yaw_sigma}}}};

  j["slip"] = {{"wheel_sigma", s.slip.wheel_sigma},
               {"twist_sigma", s.slip.twist_sigma},
               {"drift_sigma", s.slip.drift_sigma}};

  json events = json::array();
  for (const auto & ev : s.events) {
    json o = {{"type", "flip"}};
    if (ev.trigger == FlipEvent::Trigger::Time) {
      o["trigger"] = "time";
      o["time"] = ev.time;
    } else {
      o["trigger"] = "region";
      o["center"] = vec_json(ev.center);
      o["radius"] = ev.radius;
    }
    o["axis"] = vec_json(ev.axis);
    o["axis_frame"] = to_string(ev.axis_frame);
    o["angle_deg"] = ev.angle_deg;
    o["fall_duration"] = ev.fall_duration;
    events.push_back(o);
  }
  j["events"] = events;

  json terrain = {{"kind", s.terrain.kind == Terrain::Kind::Flat ? "flat" : "bumps"}};
  if (s.terrain.kind == Terrain::Kind::Bumps) {
    terrain["amplitude"] = s.terrain.amplitude;
    terrain["wavelength"] = s.terrain.wavelength;
    terrain["slip_gain"] = s.terrain.slip_gain;
  }
  j["terrain"] = terrain;

  j["run"] = {{"duration", s.run.duration},
              {"dt", s.run.dt},
              {"seed", s.run.seed},
              {"feedback", to_string(s.run.feedback)},
              {"initial_pose", {{"x", s.run.initial_pose.x}, {"y", s.run.initial_pose.y}, {"psi", s.run.initial_pose.psi}}},
              {"initial_face", to_int(s.run.initial_face)}};
  return j;
}

/// Reads, parses and validates a scenario file. The id defaults to the file stem.
inline Scenario load_scenario(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open scenario file " + path.string());
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error & e) {
    throw ValidationError("<document>", std::string("invalid JSON: ") + e.what());
  }
  Scenario s = scenario_from_json(j, path.stem().string());
  s.validate();
  return s;
}

inline std::string format_number(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline const char * kTraceHeader = "t,x,y,psi,x_est,y_est,psi_est,x_ref,y_ref,psi_ref,u1,u2,u3,u4,face,event";

inline void write_trace_csv(std::ostream & out, const Trace & trace)
{
  out << kTraceHeader << '\n';
  for (const auto & r : trace.rows) {
    const double values[] = {r.t,           r.truth.x,     r.truth.y,        r.truth.psi,      r.estimate.x,
                             r.estimate.y,  r.estimate.psi, r.reference.x,   r.reference.y,    r.reference.psi,
                             r.u(0),        r.u(1),        r.u(2),           r.u(3)};
    for (double v : values) {
      out << format_number(v) << ',';
    }
    out << to_int(r.face) << ',' << r.event << '\n';
  }
}

struct RunSummary
{
  std::string scenario_id;
  std::uint64_t seed{0};
  TrackingMetrics metrics;
  std::optional<double> catch_up_time;
  std::vector<int> face_sequence;
  std::vector<DriveWheelSet> drive_wheel_sequence;
  double wheel_speed_min{0.0};
  double wheel_speed_max{0.0};
  std::size_t saturated_steps{0};
  double estimator_rmse{0.0};
  double raw_uwb_rmse{0.0};
  double min_cov_eigenvalue{0.0};
  std::size_t face_consistency_violations{0};
  std::size_t rows{0};
  double runtime_s{0.0};  ///< reported on the console only
};

inline constexpr double kCatchUpThreshold = 0.2;

inline RunSummary summarize(const Trace & trace, const ReferenceTrajectory & ref)
{
  RunSummary s;
  s.scenario_id = trace.scenario_id;
  s.seed = trace.seed;
  s.metrics = compute_metrics(trace, ref);
  s.catch_up_time = catch_up_time(trace, ref, kCatchUpThreshold);
  double se = 0.0;
  for (const auto & r : trace.rows) {
    if (s.face_sequence.empty() || s.face_sequence.back() != to_int(r.face)) {
      s.face_sequence.push_back(to_int(r.face));
      s.drive_wheel_sequence.push_back(r.drive_wheels);
    }
    s.wheel_speed_min = std::min(s.wheel_speed_min, r.u.minCoeff());
    s.wheel_speed_max = std::max(s.wheel_speed_max, r.u.maxCoeff());
    se += (r.estimate.position() - r.truth.position()).squaredNorm();
  }
  s.saturated_steps = trace.diagnostics.saturated_steps;
  s.estimator_rmse = std::sqrt(se / static_cast<double>(trace.rows.size()));
  s.raw_uwb_rmse = trace.diagnostics.raw_uwb_rmse();
  s.min_cov_eigenvalue = trace.diagnostics.min_cov_eigenvalue;
  s.face_consistency_violations = trace.diagnostics.face_consistency_violations;
  s.rows = trace.rows.size();
  return s;
}

inline json summary_to_json(const RunSummary & s)
{
  json faces = json::array();
  for (int f : s.face_sequence) {
    faces.push_back(f);
  }
  json wheels = json::array();
  for (const auto & set : s.drive_wheel_sequence) {
    json names = json::array();
    for (WheelId w : set) {
      names.push_back(std::string(to_string(w)));
    }
    wheels.push_back(names);
  }
  json j;
  j["scenario"] = s.scenario_id;
  j["seed"] = s.seed;
  j["metrics"] = {{"e_p", s.metrics.e_p},         {"e_d", s.metrics.e_d},         {"e_y", s.metrics.e_y},
                  {"e_p_max", s.metrics.e_p_max}, {"e_d_max", s.metrics.e_d_max}, {"e_y_max", s.metrics.e_y_max}};
  j["catch_up_time"] = s.catch_up_time ? json(*s.catch_up_time) : json(nullptr);
  j["face_sequence"] = faces;
  j["drive_wheel_sequence"] = wheels;
  j["wheel_speed"] = {{"min", s.wheel_speed_min}, {"max", s.wheel_speed_max}};
  j["saturated_steps"] = s.saturated_steps;
  j["estimator"] = {{"position_rmse", s.estimator_rmse},
                    {"raw_uwb_rmse", s.raw_uwb_rmse},
                    {"min_cov_eigenvalue", s.min_cov_eigenvalue}};
  j["face_consistency_violations"] = s.face_consistency_violations;
  j["rows"] = s.rows;
  return j;
}

struct SweepRow
{
  double theta_deg{0.0};
  std::size_t n{0};
  double e_p_mean{0.0}, e_p_std{0.0};
  double e_d_mean{0.0}, e_d_std{0.0};
  double e_y_mean{0.0}, e_y_std{0.0};
};

inline const char * kSweepHeader = "theta_deg,n,e_p_mean,e_p_std,e_d_mean,e_d_std,e_y_mean,e_y_std";

/// Mean and sample standard deviation (zero for a single value).
inline std::pair<double, double> mean_std(const std::vector<double> & v)
{
  if (v.empty()) {
    return {0.0, 0.0};
  }
  double m = 0.0;
  for (double x : v) {
    m += x;
  }
  m /= static_cast<double>(v.size());
  if (v.size() < 2) {
    return {m, 0.0};
  }
  double ss = 0.0;
  for (double x : v) {
    ss += (x - m) * (x - m);
  }
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

inline SweepRow sweep_row(double theta_deg, const std::vector<TrackingMetrics> & runs)
{
  std::vector<double> ep, ed, ey;
  for (const auto & m : runs) {
    ep.push_back(m.e_p);
    ed.push_back(m.e_d);
    ey.push_back(m.e_y);
  }
  SweepRow r;
  r.theta_deg = theta_deg;
  r.n = runs.size();
  std::tie(r.e_p_mean, r.e_p_std) = mean_std(ep);
  std::tie(r.e_d_mean, r.e_d_std) = mean_std(ed);
  std::tie(r.e_y_mean, r.e_y_std) = mean_std(ey);
  return r;
}

inline void write_sweep_csv(std::ostream & out, const std::vector<SweepRow> & rows)
{
  out << kSweepHeader << '\n';
  for (const auto & r : rows) {
    out << format_number(r.theta_deg) << ',' << r.n << ',' << format_number(r.e_p_mean) << ','
        << format_number(r.e_p_std) << ',' << format_number(r.e_d_mean) << ',' << format_number(r.e_d_std) << ','
        << format_number(r.e_y_mean) << ',' << format_number(r.e_y_std) << '\n';
  }
}

}  // namespace curobot
