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

// Feedforward generation for a multirotor whose acceleration model carries a
// learned additive error:
//
//   a = u z + g + f_e(eta, u z)
//
// Given a reference up to snap, the functions here return the thrust
// acceleration u, body z-axis and their first two derivatives, plus body
// rates and angular accelerations (yaw held at zero).
//
// Two inversion paths exist. The input-independent path treats f_e as a
// function of state only and solves for u z in closed form. The
// input-dependent path solves the implicit equation with Newton's method and
// then obtains the input derivatives from linear solves with df/du.
//
// In both paths the state derivatives that drive the model (velocity,
// acceleration and jerk) are taken from the reference, never from
// measurements, so every call is a pure function of its arguments.

#ifndef FFGEN_FLATNESS_H_
#define FFGEN_FLATNESS_H_

#include <optional>
#include <string_view>

#include "ffgen/common.h"
#include "ffgen/error_model.h"
#include "ffgen/trajectory.h"

namespace ffgen {

struct FlatControl {
  double u = 0.0;  // thrust acceleration, m/s^2
  Vec3 z = Vec3::UnitZ();
  double u_dot = 0.0;
  Vec3 z_dot = Vec3::Zero();
  double u_ddot = 0.0;
  Vec3 z_ddot = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  Vec3 omega_dot = Vec3::Zero();
  Vec3 u_vec = Vec3::Zero();  // u z
};

enum class Strategy { kFF1 = 1, kFF2, kFF3, kFF4, kFF5 };

std::string_view StrategyName(Strategy s);
// Accepts "FF1".."FF5" (case-insensitive); throws kInvalidArgument.
Strategy ParseStrategy(std::string_view name);

inline constexpr double kMinThrustAccel = 1e-3;

// u z = a_d - g - f_e(x, v). The model is evaluated at the reference state
// and, for maps with input features, at the model-free command a_d - g.
// With use_model_dynamics the jerk and snap are corrected by the first and
// second total time derivatives of f_e; otherwise the reference jerk and snap
// are used as-is. model == nullptr gives the nominal inversion.
FlatControl InvertIndependent(const TrajectoryPoint& ref,
                              const LinearErrorModel* model,
                              const PhysicalParams& params,
                              bool use_model_dynamics);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
  double max_condition = 1e12;
};

struct NewtonResult {
  Vec3 u_vec = Vec3::Zero();
  int iterations = 0;
  double residual_norm = 0.0;
};

// Solves u + g + f_e(eta, u) - a_cmd = 0 starting from `guess`, with
// backtracking on the residual norm.
// Throws kSingularJacobian when cond(I + df_e/du) exceeds max_condition and
// kNoConvergence after max_iter updates.
NewtonResult NewtonSolve(const Vec3& a_cmd, const LinearErrorModel& model,
                         const StateVec& eta, const Vec3& guess,
                         const PhysicalParams& params,
                         const NewtonOptions& options = {});

// Input-dependent inversion. prev_solution warm-starts Newton; without one
// the closed-form input-independent solution seeds it. With
// use_model_dynamics clear, the input derivatives fall back to the reference
// jerk and snap.
FlatControl InvertDependent(const TrajectoryPoint& ref,
                            const LinearErrorModel& model,
                            const PhysicalParams& params,
                            const std::optional<Vec3>& prev_solution,
                            bool use_model_dynamics,
                            const NewtonOptions& options = {});

// Body rates from the body z-axis and its derivative, with the body x-axis
// built from heading (cos yaw, sin yaw, 0). yaw rate is zero so omega has no
// component along z. Throws kDegenerateAttitude when z is parallel to the
// heading or points straight down. Components are along (x_b, y_b, z).
Vec3 BodyRates(const Vec3& z, const Vec3& z_dot, double yaw = 0.0);

// Solves z_ddot = omega_dot x z + omega x z_dot for the tilt part of
// omega_dot; the yaw component is zero. omega and the result are body-frame
// components, i.e. coefficients of the heading-built axes (x_b, y_b, z).
Vec3 BodyAngularAccel(const Vec3& z, const Vec3& z_dot, const Vec3& z_ddot,
                      const Vec3& omega, double yaw = 0.0);

// FF1: nominal; FF2: model, no model dynamics; FF3: Newton, no model
// dynamics; FF4: model with dynamics; FF5: Newton with dynamics.
FlatControl GenerateFeedforward(Strategy strategy, const TrajectoryPoint& ref,
                                const LinearErrorModel* model,
                                const PhysicalParams& params,
                                const std::optional<Vec3>& prev_solution);

}  // namespace ffgen

#endif  // FFGEN_FLATNESS_H_
