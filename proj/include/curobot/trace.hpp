#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "curobot/geometry.hpp"
#include "curobot/kinematics.hpp"

namespace curobot
{

/// One timestamped record of a closed-loop run.
struct TraceRow
{
  double t{0.0};
  Pose truth;
  Pose estimate;
  Pose reference;
  WheelSpeeds u{WheelSpeeds::Zero()};  ///< commands ordered per the drive-wheel set below
  FaceId face{FaceId::F1};
  DriveWheelSet drive_wheels{drive_wheels_for_face(FaceId::F1)};
  std::string event;  ///< "", "flip" or "land"
  double height{0.0};
  double roll{0.0};
  double pitch{0.0};
  bool airborne{false};
};

/// Run-level side channels that do not fit the per-row schema.
struct TraceDiagnostics
{
  double uwb_sq_error_sum{0.0};  ///< sum of squared raw UWB position errors
  std::size_t uwb_fixes{0};
  double min_cov_eigenvalue{0.0};
  double max_cov_asymmetry{0.0};
  std::size_t saturated_steps{0};
  std::size_t face_consistency_violations{0};
  double max_plant_fk_mismatch{0.0};

  double raw_uwb_rmse() const
  {
    return uwb_fixes == 0 ? 0.0 : std::sqrt(uwb_sq_error_sum / static_cast<double>(uwb_fixes));
  }
};

struct Trace
{
  std::string scenario_id;
  std::uint64_t seed{0};
  double u_max{0.0};
  std::vector<TraceRow> rows;
  TraceDiagnostics diagnostics;
};

}  // namespace curobot
