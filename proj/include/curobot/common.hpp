#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace curobot
{

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kGravity = 9.81;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a)
{
  if (!std::isfinite(a)) {
    return a;
  }
  double r = std::fmod(a + kPi, kTwoPi);
  if (r <= 0.0) {
    r += kTwoPi;
  }
  return r - kPi;
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class FrameMismatch : public Error
{
public:
  using Error::Error;
};

class InvalidArgument : public Error
{
public:
  using Error::Error;
};

class AmbiguousFace : public Error
{
public:
  using Error::Error;
};

class NotQuasiStatic : public Error
{
public:
  using Error::Error;
};

class GimbalDegenerate : public Error
{
public:
  using Error::Error;
};

class SolverFailure : public Error
{
public:
  using Error::Error;
};

class NonMonotonicTime : public Error
{
public:
  using Error::Error;
};

class InvalidAxis : public Error
{
public:
  using Error::Error;
};

/// Scenario/config validation failure. The message names the offending field.
class ValidationError : public Error
{
public:
  ValidationError(std::string field, const std::string & what)
    : Error(field + ": " + what), field_(std::move(field))
  {
  }

  const std::string & field() const { return field_; }

private:
  std::string field_;
};

}  // namespace curobot
