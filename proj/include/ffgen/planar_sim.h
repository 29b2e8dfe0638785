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

// Planar multirotor in the world x-z plane:
//
//   m x'' = -F sin(theta),   m z'' = F cos(theta) - m g,   I theta'' = tau
//
// plus the optional disturbances below, driven by a cascaded PD controller
// around the feedforward from flatness.h. The vehicle is embedded in 3D with
// y = 0 and body z-axis (-sin theta, 0, cos theta); theta therefore equals
// minus the body rotation about +y, so theta_dot = -omega_y.

#ifndef FFGEN_PLANAR_SIM_H_
#define FFGEN_PLANAR_SIM_H_

#include <functional>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ffgen/common.h"
#include "ffgen/error_model.h"
#include "ffgen/flatness.h"
#include "ffgen/trajectory.h"

namespace ffgen {

struct PlanarState {
  double x = 0.0;
  double z = 0.0;
  double theta = 0.0;
  double x_dot = 0.0;
  double z_dot = 0.0;
  double theta_dot = 0.0;

  using Vector = Eigen::Matrix<double, 6, 1>;
  Vector AsVector() const;
  static PlanarState FromVector(const Vector& v);
  // 3D position/velocity with y = 0.
  StateVec Embedded() const;
};

struct PlanarInput {
  double force = 0.0;   // N, total thrust
  double torque = 0.0;  // N m
};

// Magnitudes of the individual plant perturbations.
inline constexpr double kConstantXAccel = 4.1;  // x'' -= 4.1
inline constexpr double kDragX = 3.1;           // x'' -= 3.1 x'
inline constexpr double kPitchCouplingX = 1.4;  // x'' += 1.4 sin(theta)
inline constexpr double kDragZ = 3.1;           // z'' -= 3.1 z'
inline constexpr double kMassOffset = 2.0;      // m += 2 (plant only)

struct DisturbanceSpec {
  bool constant_x = false;
  bool drag_x = false;
  bool pitch_coupling_x = false;
  bool drag_z = false;
  bool mass_offset = false;

  bool Any() const;
};

enum class DisturbanceSet { kA, kB, kC, kD };

std::string_view DisturbanceSetName(DisturbanceSet set);
DisturbanceSet ParseDisturbanceSet(std::string_view name);
// A: constant; B: constant + both drags; C: pitch coupling + mass;
// D: everything.
DisturbanceSpec DisturbancesFor(DisturbanceSet set);

struct Gains {
  double kp_pos = 10.0;
  double kd_pos = 10.0;
  double kp_att = 300.0;
  double kd_att = 30.0;
};

struct SimConfig {
  double dt = 1e-3;
  PhysicalParams params;
  Gains gains;
  bool feedback = true;
  Strategy strategy = Strategy::kFF1;
  DisturbanceSpec disturbances;
};

// Time derivative of the state (x', z', theta', x'', z'', theta'').
PlanarState::Vector DynamicsDeriv(const PlanarState& state,
                                  const PlanarInput& input,
                                  const DisturbanceSpec& dist,
                                  const PhysicalParams& params);

// Classical RK4 with the input held over the step.
PlanarState Rk4Step(const PlanarState& state, const PlanarInput& input,
                    const DisturbanceSpec& dist, const PhysicalParams& params,
                    double dt);

// RK4 with the input re-evaluated at every stage from (t, state).
using InputLaw = std::function<PlanarInput(double t, const PlanarState&)>;
PlanarState Rk4Step(const PlanarState& state, double t, const InputLaw& law,
                    const DisturbanceSpec& dist, const PhysicalParams& params,
                    double dt);

// Rest attitude at which thrust that cancels gravity vertically also yields
// zero horizontal acceleration under the active disturbances. Zero state when
// the constant x disturbance is off.
PlanarState TrimInitialState(const DisturbanceSpec& dist,
                             const PhysicalParams& params);
PlanarState InitialStateForSet(DisturbanceSet set,
                               const PhysicalParams& params = {});

// Thrust that holds the trim attitude at rest.
double TrimThrust(const PlanarState& trim, const DisturbanceSpec& dist,
                  const PhysicalParams& params);

struct ControllerOutput {
  PlanarInput input;
  Vec3 a_cmd = Vec3::Zero();
  FlatControl flat;
  double theta_des = 0.0;
  bool thrust_clamped = false;
};

// Position PD adds to the reference acceleration, the inversion runs on the
// corrected acceleration (with the reference jerk and snap), and the attitude
// PD adds to the feedforward pitch acceleration. Gains are ignored when
// cfg.feedback is off.
ControllerOutput ControllerStep(const TrajectoryPoint& ref,
                                const PlanarState& state,
                                const LinearErrorModel* model,
                                const SimConfig& cfg,
                                const std::optional<Vec3>& prev_u);

struct RunLogRow {
  double t = 0.0;
  PlanarState state;
  PlanarInput input;
  Vec3 u_cmd = Vec3::Zero();      // inversion output u z
  Vec3 u_applied = Vec3::Zero();  // (F / m_nom) z_body(theta)
  TrajectoryPoint ref;
  Eigen::Vector2d error = Eigen::Vector2d::Zero();  // reference - actual
  bool thrust_clamped = false;
};

struct RunLog {
  double dt = 0.0;
  std::vector<RunLogRow> rows;
};

// Closed-loop run from the trim state to the end of `traj`; the controller
// is evaluated at every RK4 stage and the state logged every step. Controller
// failures are rethrown with the step index appended.
RunLog RunTrajectory(const SimConfig& cfg, const PolySegment& traj,
                     const LinearErrorModel* model);

// Residuals for learning use the applied thrust acceleration as u_vec.
std::vector<TrainingSample> ResidualsFromLog(const RunLog& log,
                                             const PhysicalParams& params);

// Columns t,x,z,theta,xd,zd,thetad,F,tau,ux,uz,ex,ez.
void WriteRunLogCsv(std::ostream& os, const RunLog& log);

}  // namespace ffgen

#endif  // FFGEN_PLANAR_SIM_H_
