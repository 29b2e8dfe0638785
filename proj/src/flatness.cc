// Copyright 2026 The ffgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ffgen/flatness.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace ffgen {

namespace {

constexpr double kAttitudeEps = 1e-6;

StateVec ReferenceState(const TrajectoryPoint& ref) {
  return StateVec{ref.pos, ref.vel};
}

// eta_dot = (v, a), eta_ddot = (a, j) along the reference.
Vec6 EtaDot(const TrajectoryPoint& ref) {
  Vec6 d;
  d << ref.vel, ref.acc;
  return d;
}

Vec6 EtaDdot(const TrajectoryPoint& ref) {
  Vec6 d;
  d << ref.acc, ref.jerk;
  return d;
}

// Second total time derivative of f_e along the reference with u frozen:
// (d2f/deta2 eta_dot) eta_dot + df/deta eta_ddot.
Vec3 ModelSecondTimeDerivative(const ErrorModelJacobians& jac,
                               const ErrorModelHessians& hess,
                               const Vec6& eta_dot, const Vec6& eta_ddot) {
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    out(i) = eta_dot.dot(hess.eta_eta[i] * eta_dot);
  }
  return out + jac.d_eta * eta_ddot;
}

double ConditionNumber(const Mat3& m) {
  const Eigen::JacobiSVD<Mat3> svd(m);
  const Vec3 s = svd.singularValues();
  if (!(s(2) > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / s(2);
}

Vec3 SolveInputJacobian(const Mat3& df_du, const Vec3& rhs,
                        const NewtonOptions& options) {
  if (ConditionNumber(df_du) > options.max_condition) {
    throw Error(ErrorCode::kSingularJacobian,
                "I + df_e/du is singular; the model negates the input");
  }
  return Eigen::PartialPivLU<Mat3>(df_du).solve(rhs);
}

// Shared tail of both inversion paths: from u_vec and its first two time
// derivatives to thrust, attitude and body rates.
FlatControl FromInputDerivatives(const Vec3& u_vec, const Vec3& u_vec_dot,
                                 const Vec3& u_vec_ddot) {
  FlatControl out;
  out.u_vec = u_vec;
  out.u = u_vec.norm();
  if (!(out.u >= kMinThrustAccel)) {
    throw Error(ErrorCode::kDegenerateThrust,
                "commanded thrust acceleration below minimum");
  }
  out.z = u_vec / out.u;
  out.u_dot = u_vec_dot.dot(out.z);
  out.z_dot = (u_vec_dot - out.u_dot * out.z) / out.u;
  out.u_ddot = u_vec_ddot.dot(out.z) + out.u * out.z_dot.squaredNorm();
  out.z_ddot =
      (u_vec_ddot - out.u_ddot * out.z - 2.0 * out.u_dot * out.z_dot) / out.u;
  out.omega = BodyRates(out.z, out.z_dot);
  out.omega_dot = BodyAngularAccel(out.z, out.z_dot, out.z_ddot, out.omega);
  return out;
}

struct BodyAxes {
  Vec3 x;
  Vec3 y;
};

BodyAxes HeadingAxes(const Vec3& z, double yaw) {
  const Vec3 x_c(std::cos(yaw), std::sin(yaw), 0.0);
  Vec3 y_b = z.cross(x_c);
  const double n = y_b.norm();
  if (n < kAttitudeEps || z.z() < -1.0 + kAttitudeEps) {
    throw Error(ErrorCode::kDegenerateAttitude,
                "body z-axis is singular for the heading construction");
  }
  y_b /= n;
  return BodyAxes{y_b.cross(z), y_b};
}

}  // namespace

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kFF1: return "FF1";
    case Strategy::kFF2: return "FF2";
    case Strategy::kFF3: return "FF3";
    case Strategy::kFF4: return "FF4";
    case Strategy::kFF5: return "FF5";
  }
  return "?";
}

Strategy ParseStrategy(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  for (int i = 1; i <= 5; ++i) {
    const auto s = static_cast<Strategy>(i);
    if (upper == StrategyName(s)) return s;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown strategy: " + std::string(name));
}

FlatControl InvertIndependent(const TrajectoryPoint& ref,
                              const LinearErrorModel* model,
                              const PhysicalParams& params,
                              bool use_model_dynamics) {
  const Vec3 u_nominal = ref.acc - params.GravityVector();
  if (model == nullptr) {
    return FromInputDerivatives(u_nominal, ref.jerk, ref.snap);
  }
  const StateVec eta = ReferenceState(ref);
  const Vec3 u_vec = u_nominal - model->Evaluate(eta, u_nominal);
  if (!use_model_dynamics) {
    return FromInputDerivatives(u_vec, ref.jerk, ref.snap);
  }
  const ErrorModelJacobians jac = model->Jacobians(eta, u_nominal);
  const ErrorModelHessians hess = model->Hessians(eta, u_nominal);
  const Vec6 eta_dot = EtaDot(ref);
  const Vec3 jerk_eff = ref.jerk - jac.d_eta * eta_dot;
  const Vec3 snap_eff =
      ref.snap - ModelSecondTimeDerivative(jac, hess, eta_dot, EtaDdot(ref));
  return FromInputDerivatives(u_vec, jerk_eff, snap_eff);
}

NewtonResult NewtonSolve(const Vec3& a_cmd, const LinearErrorModel& model,
                         const StateVec& eta, const Vec3& guess,
                         const PhysicalParams& params,
                         const NewtonOptions& options) {
  if (!guess.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "Newton guess is not finite");
  }
  const Vec3 g = params.GravityVector();
  auto residual_at = [&](const Vec3& u) {
    return Vec3(u + g + model.Evaluate(eta, u) - a_cmd);
  };
  NewtonResult result;
  result.u_vec = guess;
  Vec3 residual = residual_at(result.u_vec);
  for (;;) {
    result.residual_norm = residual.norm();
    if (result.residual_norm <= options.tol) return result;
    if (!std::isfinite(result.residual_norm) ||
        result.iterations >= options.max_iter) {
      std::ostringstream msg;
      msg << "Newton did not converge after " << result.iterations
          << " iterations (residual " << result.residual_norm << ")";
      throw Error(ErrorCode::kNoConvergence, msg.str());
    }
    const Mat3 df_du =
        Mat3::Identity() + model.Jacobians(eta, result.u_vec).d_u;
    const Vec3 step = SolveInputJacobian(df_du, residual, options);
    // Backtrack until the residual drops; full steps near the root.
    double t = 1.0;
    Vec3 next = result.u_vec - step;
    Vec3 next_res = residual_at(next);
    while (!(next_res.norm() < result.residual_norm) && t > 1e-4) {
      t *= 0.5;
      next = result.u_vec - t * step;
      next_res = residual_at(next);
    }
    result.u_vec = next;
    residual = next_res;
    ++result.iterations;
  }
}

FlatControl InvertDependent(const TrajectoryPoint& ref,
                            const LinearErrorModel& model,
                            const PhysicalParams& params,
                            const std::optional<Vec3>& prev_solution,
                            bool use_model_dynamics,
                            const NewtonOptions& options) {
  const StateVec eta = ReferenceState(ref);
  Vec3 guess;
  if (prev_solution) {
    guess = *prev_solution;
  } else {
    const Vec3 u_nominal = ref.acc - params.GravityVector();
    guess = u_nominal - model.Evaluate(eta, u_nominal);
  }
  const Vec3 u_vec =
      NewtonSolve(ref.acc, model, eta, guess, params, options).u_vec;
  if (!use_model_dynamics) {
    return FromInputDerivatives(u_vec, ref.jerk, ref.snap);
  }

  const ErrorModelJacobians jac = model.Jacobians(eta, u_vec);
  const ErrorModelHessians hess = model.Hessians(eta, u_vec);
  const Vec6 eta_dot = EtaDot(ref);
  const Mat3 df_du = Mat3::Identity() + jac.d_u;

  // df/dt = df_e/deta eta_dot - j_d
  const Vec3 df_dt = jac.d_eta * eta_dot - ref.jerk;
  const Vec3 u_vec_dot = SolveInputJacobian(df_du, -df_dt, options);

  // (d2f/du2 u_dot + 2 d2f/dudt) u_dot
  Vec3 quadratic;
  for (int i = 0; i < 3; ++i) {
    quadratic(i) = u_vec_dot.dot(hess.u_u[i] * u_vec_dot) +
                   2.0 * (hess.u_eta[i] * eta_dot).dot(u_vec_dot);
  }
  const Vec3 d2f_dt2 =
      ModelSecondTimeDerivative(jac, hess, eta_dot, EtaDdot(ref)) - ref.snap;
  const Vec3 u_vec_ddot =
      SolveInputJacobian(df_du, -quadratic - d2f_dt2, options);
  return FromInputDerivatives(u_vec, u_vec_dot, u_vec_ddot);
}

Vec3 BodyRates(const Vec3& z, const Vec3& z_dot, double yaw) {
  const BodyAxes axes = HeadingAxes(z, yaw);
  return Vec3(-z_dot.dot(axes.y), z_dot.dot(axes.x), 0.0);
}

Vec3 BodyAngularAccel(const Vec3& z, const Vec3& z_dot, const Vec3& z_ddot,
                      const Vec3& omega, double yaw) {
  const BodyAxes axes = HeadingAxes(z, yaw);
  // omega holds body-frame components.
  const Vec3 omega_world =
      omega.x() * axes.x + omega.y() * axes.y + omega.z() * z;
  const Vec3 h = z_ddot - omega_world.cross(z_dot);
  return Vec3(-h.dot(axes.y), h.dot(axes.x), 0.0);
}

FlatControl GenerateFeedforward(Strategy strategy, const TrajectoryPoint& ref,
                                const LinearErrorModel* model,
                                const PhysicalParams& params,
                                const std::optional<Vec3>& prev_solution) {
  if (strategy == Strategy::kFF1) {
    return InvertIndependent(ref, nullptr, params, false);
  }
  if (model == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(StrategyName(strategy)) + " requires a model");
  }
  switch (strategy) {
    case Strategy::kFF2:
      return InvertIndependent(ref, model, params, false);
    case Strategy::kFF3:
      return InvertDependent(ref, *model, params, prev_solution, false);
    case Strategy::kFF4:
      return InvertIndependent(ref, model, params, true);
    case Strategy::kFF5:
    default:
      return InvertDependent(ref, *model, params, prev_solution, true);
  }
}

}  // namespace ffgen
