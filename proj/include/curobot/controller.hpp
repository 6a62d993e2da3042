#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "curobot/common.hpp"
#include "curobot/geometry.hpp"
#include "curobot/kinematics.hpp"
#include "curobot/trajectory.hpp"

namespace curobot
{

enum class ControllerMode { Mpc, Pid };

inline const char * to_string(ControllerMode m) { return m == ControllerMode::Mpc ? "mpc" : "pid"; }

struct ControllerConfig
{
  ControllerMode mode{ControllerMode::Mpc};
  int horizon{10};
  double dt{0.05};
  Eigen::Matrix3d Q{Eigen::Vector3d(2.0e4, 2.0e4, 10.0).asDiagonal()};
  Eigen::Matrix4d R{Eigen::Matrix4d::Identity() * 1.0e-4};
  double diff_weight{1.0e-5};  ///< W_e
  double cross_sign{1.0};      ///< sign of the 2 U_r^T E U cross term
  Eigen::Matrix3d Kp{Eigen::Vector3d(1.0, 1.0, 2.0).asDiagonal()};
  double u_max{kDefaultWheelSpeedLimit};

  void validate() const
  {
    if (horizon < 1) {
      throw ValidationError("controller.horizon", "must be >= 1");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw ValidationError("controller.dt", "must be > 0");
    }
    auto psd = [](const auto & m, const char * field) {
      if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ValidationError(field, "must be symmetric");
      }
      Eigen::SelfAdjointEigenSolver<std::decay_t<decltype(m)>> es(m);
      if (es.eigenvalues().minCoeff() < -1e-12) {
        throw ValidationError(field, "must be positive semidefinite");
      }
    };
    psd(Q, "controller.q");
    psd(R, "controller.r");
    if (!(diff_weight >= 0.0) || !std::isfinite(diff_weight)) {
      throw ValidationError("controller.diff_weight", "must be >= 0");
    }
    if (cross_sign != 1.0 && cross_sign != -1.0) {
      throw ValidationError("controller.cross_sign", "must be +1 or -1");
    }
    if (!Kp.allFinite()) {
      throw ValidationError("controller.kp", "must be finite");
    }
    if (!(u_max > 0.0)) {
      throw ValidationError("controller.u_max", "must be > 0");
    }
  }
};

/// (s_x - s_x,r, s_y - s_y,r, wrap(psi - psi_r)) in the world frame.
struct ErrorState
{
  Eigen::Vector3d x{Eigen::Vector3d::Zero()};

  static ErrorState between(const Pose & actual, const Pose & reference)
  {
    return {Eigen::Vector3d(actual.x - reference.x, actual.y - reference.y, wrap_angle(actual.psi - reference.psi))};
  }
};

/// Error dynamics x_{k+1} = x_k + B_k u~_k with B_k = dt T(psi_r,k) M.
struct PredictionModel
{
  std::vector<Eigen::Matrix<double, 3, 4>> B;

  int horizon() const { return static_cast<int>(B.size()); }

  static PredictionModel build(const std::vector<double> & psi_ref, double dt, const CubeGeometry & geom, FaceId face)
  {
    const Eigen::Matrix<double, 3, 4> m = forward_map(geom, face);
    PredictionModel model;
    model.B.reserve(psi_ref.size());
    for (double psi : psi_ref) {
      model.B.push_back(dt * twist_transform(psi) * m);
    }
    return model;
  }
};

struct ControlOutput
{
  WheelSpeeds u{WheelSpeeds::Zero()};
  WheelSpeeds u_r{WheelSpeeds::Zero()};
  WheelSpeeds u_tilde{WheelSpeeds::Zero()};
  double predicted_cost{0.0};
  bool saturated{false};
};

/// Condensed objective J(U) = U^T H U + 2 g^T U + c.
struct QpProblem
{
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  double c{0.0};

  double cost(const Eigen::VectorXd & U) const { return U.dot(H * U) + 2.0 * g.dot(U) + c; }
};

inline BodyTwist desired_twist(const ErrorState & x, const BodyTwist & twist_r, const ControllerConfig & cfg)
{
  expect_frame(twist_r, Frame::World, "desired_twist");
  const Eigen::Vector3d v = twist_r.vector() - cfg.Kp * x.x;
  return BodyTwist::world(v.x(), v.y(), v.z());
}

inline WheelSpeeds feedforward_wheel_speeds(const BodyTwist & twist_world, double psi, const CubeGeometry & geom,
                                            FaceId face)
{
  return inverse_kinematics(world_to_body(twist_world, psi), geom, face);
}

/// Pairwise-difference operator over the four wheels (one row per unordered pair).
inline Eigen::Matrix<double, 6, 4> difference_operator()
{
  Eigen::Matrix<double, 6, 4> d = Eigen::Matrix<double, 6, 4>::Zero();
  int row = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      d(row, i) = 1.0;
      d(row, j) = -1.0;
      ++row;
    }
  }
  return d;
}

/// Block-diagonal I_N (x) W_e D^T D.
inline Eigen::MatrixXd stacked_difference_penalty(int horizon, double weight)
{
  const Eigen::Matrix<double, 6, 4> d = difference_operator();
  const Eigen::Matrix4d block = weight * d.transpose() * d;
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(4 * horizon, 4 * horizon);
  for (int k = 0; k < horizon; ++k) {
    e.block<4, 4>(4 * k, 4 * k) = block;
  }
  return e;
}

inline QpProblem build_qp(const ErrorState & x0, const Eigen::VectorXd & U_r, const PredictionModel & model,
                          const ControllerConfig & cfg)
{
  const int n = model.horizon();
  if (n < 1) {
    throw InvalidArgument("build_qp: empty prediction model");
  }
  if (U_r.size() != 4 * n) {
    throw InvalidArgument("build_qp: U_r has " + std::to_string(U_r.size()) + " entries, expected " +
                          std::to_string(4 * n));
  }

  // H_pred: block (k, j) = B_j for j <= k, rows k standing for x_{k+1}.
  Eigen::MatrixXd h_pred = Eigen::MatrixXd::Zero(3 * n, 4 * n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j <= k; ++j) {
      h_pred.block<3, 4>(3 * k, 4 * j) = model.B[static_cast<std::size_t>(j)];
    }
  }
  Eigen::MatrixXd q_bar = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  Eigen::MatrixXd r_bar = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  for (int k = 0; k < n; ++k) {
    q_bar.block<3, 3>(3 * k, 3 * k) = cfg.Q;
    r_bar.block<4, 4>(4 * k, 4 * k) = cfg.R;
  }
  const Eigen::MatrixXd e_bar = stacked_difference_penalty(n, cfg.diff_weight);
  const Eigen::VectorXd fx0 = x0.x.replicate(n, 1);

  QpProblem qp;
  const Eigen::MatrixXd hq = h_pred.transpose() * q_bar;
  qp.H = hq * h_pred + r_bar + e_bar;
  qp.H = 0.5 * (qp.H + qp.H.transpose());
  qp.g = hq * fx0 + cfg.cross_sign * (e_bar * U_r);
  qp.c = fx0.dot(q_bar * fx0) + U_r.dot(e_bar * U_r);
  return qp;
}

inline Eigen::VectorXd solve_qp(const QpProblem & qp)
{
  const Eigen::MatrixXd h = qp.H + 1e-9 * Eigen::MatrixXd::Identity(qp.H.rows(), qp.H.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw SolverFailure("MPC Hessian is not positive definite");
  }
  Eigen::VectorXd u = llt.solve(-qp.g);
  if (!u.allFinite()) {
    throw SolverFailure("MPC solution is not finite");
  }
  return u;
}

inline WheelSpeeds saturate(const WheelSpeeds & u, double u_max, bool * hit = nullptr)
{
  const WheelSpeeds out = u.cwiseMax(-u_max).cwiseMin(u_max);
  if (hit != nullptr) {
    *hit = (out.array() != u.array()).any();
  }
  return out;
}

/**
 * @brief One control step: outer P loop, feedforward and MPC correction.
 *
 * `window[k]` is the reference at t + k dt for k = 0..N-1. Step 0 of the stacked
 * feedforward uses the desired twist at the measured yaw; later steps use the
 * reference twist at the reference yaw.
 */
inline ControlOutput solve_mpc(const Pose & pose, const std::vector<TrajectorySample> & window,
                               const CubeGeometry & geom, FaceId face, const ControllerConfig & cfg)
{
  if (window.empty()) {
    throw InvalidArgument("solve_mpc: empty reference window");
  }
  const ErrorState x0 = ErrorState::between(pose, window.front().pose);
  ControlOutput out;
  out.u_r = feedforward_wheel_speeds(desired_twist(x0, window.front().twist, cfg), pose.psi, geom, face);

  if (cfg.mode == ControllerMode::Mpc) {
    const int n = cfg.horizon;
    if (static_cast<int>(window.size()) < n) {
      throw InvalidArgument("solve_mpc: window shorter than the horizon");
    }
    std::vector<double> psi_ref;
    psi_ref.reserve(static_cast<std::size_t>(n));
    Eigen::VectorXd u_ref(4 * n);
    u_ref.head<4>() = out.u_r;
    for (int k = 0; k < n; ++k) {
      const auto & s = window[static_cast<std::size_t>(k)];
      psi_ref.push_back(s.pose.psi);
      if (k > 0) {
        u_ref.segment<4>(4 * k) = feedforward_wheel_speeds(s.twist, s.pose.psi, geom, face);
      }
    }
    const QpProblem qp = build_qp(x0, u_ref, PredictionModel::build(psi_ref, cfg.dt, geom, face), cfg);
    const Eigen::VectorXd u_star = solve_qp(qp);
    out.u_tilde = u_star.head<4>();
    out.predicted_cost = qp.cost(u_star);
  }
  out.u = saturate(out.u_r + out.u_tilde, cfg.u_max, &out.saturated);
  return out;
}

}  // namespace curobot
