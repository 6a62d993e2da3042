#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "curobot/common.hpp"
#include "curobot/kinematics.hpp"

namespace curobot
{

struct NominalState
{
  Eigen::Vector2d p{Eigen::Vector2d::Zero()};
  Eigen::Vector2d v{Eigen::Vector2d::Zero()};
  double psi{0.0};

  Pose pose() const { return Pose{p.x(), p.y(), psi}; }
};

using Matrix5d = Eigen::Matrix<double, 5, 5>;
using Vector5d = Eigen::Matrix<double, 5, 1>;

/// Covariance over the error state (dp, dv, dpsi).
struct ErrorCovariance
{
  Matrix5d P{Matrix5d::Identity() * 1e-4};

  double min_eigenvalue() const { return Eigen::SelfAdjointEigenSolver<Matrix5d>(P).eigenvalues().minCoeff(); }
};

/// Planar specific force (gravity already removed) and yaw rate, both body frame.
struct ImuSample
{
  Eigen::Vector2d a_body{Eigen::Vector2d::Zero()};
  double gyro_z{0.0};
  double t{0.0};
};

struct UwbFix
{
  Eigen::Vector2d p_meas{Eigen::Vector2d::Zero()};
  double sigma{0.1};
  double t{0.0};
};

struct YawFix
{
  double psi_meas{0.0};
  double sigma{0.02};
  double t{0.0};
};

/// Per-sample noise standard deviations.
struct ImuNoise
{
  double accel_sigma{0.05};  ///< [m/s^2]
  double gyro_sigma{0.005};  ///< [rad/s]
};

struct EskfResult
{
  NominalState state;
  ErrorCovariance cov;
};

namespace detail
{

inline Eigen::Matrix2d d_rotation(double psi)
{
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  Eigen::Matrix2d d;
  d << -s, -c, c, -s;
  return d;
}

inline void symmetrize(Matrix5d & p) { p = 0.5 * (p + p.transpose()).eval(); }

/// Joseph-form update for a linear measurement with innovation `y`.
template <int M>
EskfResult kalman_update(const NominalState & state, const ErrorCovariance & cov, const Eigen::Matrix<double, M, 5> & h,
                         const Eigen::Matrix<double, M, 1> & y, const Eigen::Matrix<double, M, M> & r)
{
  const Matrix5d & p = cov.P;
  const Eigen::Matrix<double, M, M> s = h * p * h.transpose() + r;
  const Eigen::Matrix<double, 5, M> k = p * h.transpose() * s.inverse();
  const Vector5d dx = k * y;
  const Matrix5d ikh = Matrix5d::Identity() - k * h;

  EskfResult out;
  out.cov.P = ikh * p * ikh.transpose() + k * r * k.transpose();
  symmetrize(out.cov.P);
  out.state.p = state.p + dx.segment<2>(0);
  out.state.v = state.v + dx.segment<2>(2);
  out.state.psi = wrap_angle(state.psi + dx(4));
  return out;
}

}  // namespace detail

inline EskfResult predict(const NominalState & state, const ErrorCovariance & cov, const ImuSample & imu, double dt,
                          const ImuNoise & noise)
{
  if (!(dt > 0.0)) {
    throw NonMonotonicTime("ESKF predict: dt must be > 0, got " + std::to_string(dt));
  }
  const Eigen::Matrix2d r = planar_rotation(state.psi);
  const Eigen::Vector2d a_world = r * imu.a_body;
  const Eigen::Vector2d da = detail::d_rotation(state.psi) * imu.a_body;

  EskfResult out;
  out.state.p = state.p + state.v * dt + 0.5 * a_world * dt * dt;
  out.state.v = state.v + a_world * dt;
  out.state.psi = wrap_angle(state.psi + imu.gyro_z * dt);

  Matrix5d f = Matrix5d::Identity();
  f.block<2, 2>(0, 2) = Eigen::Matrix2d::Identity() * dt;
  f.block<2, 1>(0, 4) = 0.5 * da * dt * dt;
  f.block<2, 1>(2, 4) = da * dt;

  Eigen::Matrix<double, 5, 3> g = Eigen::Matrix<double, 5, 3>::Zero();
  g.block<2, 2>(0, 0) = 0.5 * r * dt * dt;
  g.block<2, 2>(2, 0) = r * dt;
  g(4, 2) = dt;
  const Eigen::Vector3d q(noise.accel_sigma * noise.accel_sigma, noise.accel_sigma * noise.accel_sigma,
                          noise.gyro_sigma * noise.gyro_sigma);

  out.cov.P = f * cov.P * f.transpose() + g * q.asDiagonal() * g.transpose();
  detail::symmetrize(out.cov.P);
  return out;
}

inline EskfResult update_uwb(const NominalState & state, const ErrorCovariance & cov, const UwbFix & fix)
{
  if (!(fix.sigma > 0.0)) {
    throw InvalidArgument("UWB sigma must be > 0");
  }
  Eigen::Matrix<double, 2, 5> h = Eigen::Matrix<double, 2, 5>::Zero();
  h.block<2, 2>(0, 0) = Eigen::Matrix2d::Identity();
  const Eigen::Vector2d y = fix.p_meas - state.p;
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * fix.sigma * fix.sigma;
  return detail::kalman_update<2>(state, cov, h, y, r);
}

inline EskfResult update_yaw(const NominalState & state, const ErrorCovariance & cov, const YawFix & fix)
{
  if (!(fix.sigma > 0.0)) {
    throw InvalidArgument("yaw sigma must be > 0");
  }
  Eigen::Matrix<double, 1, 5> h = Eigen::Matrix<double, 1, 5>::Zero();
  h(0, 4) = 1.0;
  const Eigen::Matrix<double, 1, 1> y(wrap_angle(fix.psi_meas - state.psi));
  const Eigen::Matrix<double, 1, 1> r(fix.sigma * fix.sigma);
  return detail::kalman_update<1>(state, cov, h, y, r);
}

/// Initial one-sigma uncertainty of the filter.
struct EskfInit
{
  double p_sigma{0.1};
  double v_sigma{0.05};
  double psi_sigma{0.05};
};

/**
 * @brief Time-ordered planar ESKF.
 *
 * Measurements carry timestamps; IMU samples must strictly increase, and UWB / yaw fixes
 * may not precede the last IMU sample.
 */
class Eskf
{
public:
  Eskf(const Pose & initial, double t0, const ImuNoise & noise, const EskfInit & init = {})
    : noise_(noise), t_(t0)
  {
    state_.p = initial.position();
    state_.psi = wrap_angle(initial.psi);
    cov_.P = Matrix5d::Zero();
    cov_.P.diagonal() << init.p_sigma * init.p_sigma, init.p_sigma * init.p_sigma, init.v_sigma * init.v_sigma,
      init.v_sigma * init.v_sigma, init.psi_sigma * init.psi_sigma;
  }

  void process(const ImuSample & imu)
  {
    if (!(imu.t > t_)) {
      throw NonMonotonicTime("IMU sample at t=" + std::to_string(imu.t) + " does not follow t=" + std::to_string(t_));
    }
    apply(predict(state_, cov_, imu, imu.t - t_, noise_));
    t_ = imu.t;
  }

  void process(const UwbFix & fix)
  {
    check_time(fix.t, "UWB");
    apply(update_uwb(state_, cov_, fix));
  }

  void process(const YawFix & fix)
  {
    check_time(fix.t, "yaw");
    apply(update_yaw(state_, cov_, fix));
  }

  /// Scales the yaw variance by `factor`, keeping P positive semidefinite.
  void inflate_yaw(double factor)
  {
    if (!(factor >= 1.0)) {
      throw InvalidArgument("yaw inflation factor must be >= 1");
    }
    const double s = std::sqrt(factor);
    cov_.P.row(4) *= s;
    cov_.P.col(4) *= s;
  }

  /// Re-anchors yaw after the body frame is relabelled. Yaw correlations are dropped and the
  /// yaw variance is kept, but never below sigma^2.
  void reset_yaw(double psi, double sigma)
  {
    const double var = std::max(cov_.P(4, 4), sigma * sigma);
    state_.psi = wrap_angle(psi);
    cov_.P.row(4).setZero();
    cov_.P.col(4).setZero();
    cov_.P(4, 4) = var;
  }

  const NominalState & state() const { return state_; }
  const ErrorCovariance & covariance() const { return cov_; }
  double time() const { return t_; }

private:
  void apply(const EskfResult & r)
  {
    state_ = r.state;
    cov_ = r.cov;
  }

  void check_time(double t, const char * what) const
  {
    if (t < t_) {
      throw NonMonotonicTime(std::string(what) + " fix at t=" + std::to_string(t) + " precedes t=" + std::to_string(t_));
    }
  }

  ImuNoise noise_;
  NominalState state_;
  ErrorCovariance cov_;
  double t_;
};

}  // namespace curobot
