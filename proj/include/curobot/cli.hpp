#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "curobot/io.hpp"
#include "curobot/presets.hpp"
#include "curobot/simulator.hpp"

namespace curobot::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

struct RunOverrides
{
  std::optional<std::uint64_t> seed;
  std::optional<Feedback> feedback;
  std::optional<ControllerMode> controller;
};

namespace detail
{

inline std::ofstream open_output(const std::filesystem::path & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  return out;
}

inline void prepare_dir(const std::filesystem::path & dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create " + dir.string() + ": " + ec.message());
  }
}

/// Maps library exceptions onto exit codes, printing the diagnostic to `err`.
template <typename F>
int guarded(std::ostream & err, F && body)
{
  try {
    return body();
  } catch (const ValidationError & e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception & e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace detail

inline void apply(Scenario & s, const RunOverrides & o)
{
  if (o.seed) {
    s.run.seed = *o.seed;
  }
  if (o.feedback) {
    s.run.feedback = *o.feedback;
  }
  if (o.controller) {
    s.controller.mode = *o.controller;
  }
}

/// Simulates one scenario and writes trace.csv and summary.json into `out_dir`.
inline RunSummary run_to_dir(const Scenario & s, const std::filesystem::path & out_dir)
{
  s.validate();
  detail::prepare_dir(out_dir);
  const auto start = std::chrono::steady_clock::now();
  const Trace trace = run_scenario(s);
  RunSummary summary = summarize(trace, ReferenceTrajectory(s.trajectory));
  summary.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  auto csv = detail::open_output(out_dir / "trace.csv");
  write_trace_csv(csv, trace);
  auto js = detail::open_output(out_dir / "summary.json");
  js << summary_to_json(summary).dump(2) << '\n';
  return summary;
}

inline int cmd_run(const std::filesystem::path & scenario_path, const std::filesystem::path & out_dir,
                   const RunOverrides & overrides = {}, std::ostream & out = std::cout, std::ostream & err = std::cerr)
{
  return detail::guarded(err, [&] {
    Scenario s = load_scenario(scenario_path);
    apply(s, overrides);
    const RunSummary r = run_to_dir(s, out_dir);
    out << s.id << " seed=" << r.seed << " e_p=" << format_number(r.metrics.e_p)
        << " e_d=" << format_number(r.metrics.e_d) << " e_y=" << format_number(r.metrics.e_y) << " catch_up="
        << (r.catch_up_time ? format_number(*r.catch_up_time) : std::string("never")) << " faces=";
    for (std::size_t i = 0; i < r.face_sequence.size(); ++i) {
      out << (i ? "->" : "") << r.face_sequence[i];
    }
    out << " runtime=" << format_number(r.runtime_s) << "s\n";
    return kExitOk;
  });
}

inline const std::vector<double> & sweep_angles()
{
  static const std::vector<double> angles{0, 5, 10, 15, 20, 25, 30, 35, 40, 45};
  return angles;
}

/// Runs every (theta, seed) pair of the line sweep; seeds are 1..repeats.
inline std::vector<SweepRow> line_sweep(const Scenario & base, int repeats, unsigned threads)
{
  if (repeats < 1) {
    throw ValidationError("repeats", "must be >= 1");
  }
  const auto & angles = sweep_angles();
  const std::size_t jobs = angles.size() * static_cast<std::size_t>(repeats);
  std::vector<TrackingMetrics> results(jobs);
  std::vector<Scenario> scenarios;
  scenarios.reserve(jobs);
  for (double theta : angles) {
    for (int k = 0; k < repeats; ++k) {
      Scenario s = base;
      s.trajectory.kind = TrajectoryKind::Line;
      s.trajectory.theta = deg_to_rad(theta);
      s.run.seed = static_cast<std::uint64_t>(k + 1);
      s.validate();
      scenarios.push_back(std::move(s));
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      try {
        const Trace t = run_scenario(scenarios[i]);
        results[i] = compute_metrics(t, ReferenceTrajectory(scenarios[i].trajectory));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto & th : pool) {
    th.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  std::vector<SweepRow> rows;
  for (std::size_t a = 0; a < angles.size(); ++a) {
    const auto first = results.begin() + static_cast<long>(a * static_cast<std::size_t>(repeats));
    rows.push_back(sweep_row(angles[a], std::vector<TrackingMetrics>(first, first + repeats)));
  }
  return rows;
}

inline int cmd_line_sweep(const std::filesystem::path & out_dir, int repeats, unsigned threads = 1,
                          const std::optional<std::filesystem::path> & base_path = std::nullopt,
                          std::ostream & out = std::cout, std::ostream & err = std::cerr)
{
  return detail::guarded(err, [&] {
    const Scenario base = base_path ? load_scenario(*base_path) : presets::line_sweep();
    const auto start = std::chrono::steady_clock::now();
    const auto rows = line_sweep(base, repeats, threads);
    detail::prepare_dir(out_dir);
    auto csv = detail::open_output(out_dir / "sweep.csv");
    write_sweep_csv(csv, rows);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto & r : rows) {
      out << "theta=" << format_number(r.theta_deg) << " e_p=" << format_number(r.e_p_mean)
          << " e_d=" << format_number(r.e_d_mean) << " e_y=" << format_number(r.e_y_mean) << '\n';
    }
    out << rows.size() * static_cast<std::size_t>(repeats) << " runs in " << format_number(secs) << "s\n";
    return kExitOk;
  });
}

inline int cmd_validate(const std::filesystem::path & scenario_path, std::ostream & out = std::cout,
                        std::ostream & err = std::cerr)
{
  return detail::guarded(err, [&] {
    const Scenario s = load_scenario(scenario_path);
    out << scenario_to_json(s).dump(2) << '\n';
    return kExitOk;
  });
}

/// Writes every built-in preset as `<dir>/<id>.json`.
inline int cmd_presets(const std::filesystem::path & dir, std::ostream & out = std::cout,
                       std::ostream & err = std::cerr)
{
  return detail::guarded(err, [&] {
    detail::prepare_dir(dir);
    for (const auto & s : builtin_presets()) {
      s.validate();
      const auto path = dir / (s.id + ".json");
      auto f = detail::open_output(path);
      f << scenario_to_json(s).dump(2) << '\n';
      out << path.string() << '\n';
    }
    return kExitOk;
  });
}

}  // namespace curobot::cli
