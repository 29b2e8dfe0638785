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

#include "ffgen/planar_sim.h"

#include <cctype>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <string>

namespace ffgen {

namespace {

double WrapAngle(double a) {
  constexpr double kPi = std::numbers::pi;
  a = std::remainder(a, 2.0 * kPi);
  return a <= -kPi ? a + 2.0 * kPi : a;
}

double PlantMass(const DisturbanceSpec& dist, const PhysicalParams& params) {
  return dist.mass_offset ? params.mass + kMassOffset : params.mass;
}

Vec3 BodyZ(double theta) {
  return Vec3(-std::sin(theta), 0.0, std::cos(theta));
}

}  // namespace

PlanarState::Vector PlanarState::AsVector() const {
  Vector v;
  v << x, z, theta, x_dot, z_dot, theta_dot;
  return v;
}

PlanarState PlanarState::FromVector(const Vector& v) {
  return PlanarState{v(0), v(1), v(2), v(3), v(4), v(5)};
}

StateVec PlanarState::Embedded() const {
  return StateVec{Vec3(x, 0.0, z), Vec3(x_dot, 0.0, z_dot)};
}

bool DisturbanceSpec::Any() const {
  return constant_x || drag_x || pitch_coupling_x || drag_z || mass_offset;
}

std::string_view DisturbanceSetName(DisturbanceSet set) {
  switch (set) {
    case DisturbanceSet::kA: return "A";
    case DisturbanceSet::kB: return "B";
    case DisturbanceSet::kC: return "C";
    case DisturbanceSet::kD: return "D";
  }
  return "?";
}

DisturbanceSet ParseDisturbanceSet(std::string_view name) {
  if (name.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(name[0]))) {
      case 'A': return DisturbanceSet::kA;
      case 'B': return DisturbanceSet::kB;
      case 'C': return DisturbanceSet::kC;
      case 'D': return DisturbanceSet::kD;
    }
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown disturbance set: " + std::string(name));
}

DisturbanceSpec DisturbancesFor(DisturbanceSet set) {
  DisturbanceSpec d;
  switch (set) {
    case DisturbanceSet::kA:
      d.constant_x = true;
      break;
    case DisturbanceSet::kB:
      d.constant_x = d.drag_x = d.drag_z = true;
      break;
    case DisturbanceSet::kC:
      d.pitch_coupling_x = d.mass_offset = true;
      break;
    case DisturbanceSet::kD:
      d.constant_x = d.drag_x = d.pitch_coupling_x = d.drag_z =
          d.mass_offset = true;
      break;
  }
  return d;
}

PlanarState::Vector DynamicsDeriv(const PlanarState& s, const PlanarInput& in,
                                  const DisturbanceSpec& dist,
                                  const PhysicalParams& params) {
  const double m = PlantMass(dist, params);
  const double sin_t = std::sin(s.theta);
  double x_ddot = -in.force / m * sin_t;
  double z_ddot = in.force / m * std::cos(s.theta) - params.gravity;
  if (dist.constant_x) x_ddot -= kConstantXAccel;
  if (dist.drag_x) x_ddot -= kDragX * s.x_dot;
  if (dist.pitch_coupling_x) x_ddot += kPitchCouplingX * sin_t;
  if (dist.drag_z) z_ddot -= kDragZ * s.z_dot;

  PlanarState::Vector d;
  d << s.x_dot, s.z_dot, s.theta_dot, x_ddot, z_ddot,
      in.torque / params.inertia;
  return d;
}

PlanarState Rk4Step(const PlanarState& state, const PlanarInput& input,
                    const DisturbanceSpec& dist, const PhysicalParams& params,
                    double dt) {
  return Rk4Step(
      state, 0.0, [&input](double, const PlanarState&) { return input; },
      dist, params, dt);
}

PlanarState Rk4Step(const PlanarState& state, double t, const InputLaw& law,
                    const DisturbanceSpec& dist, const PhysicalParams& params,
                    double dt) {
  using V = PlanarState::Vector;
  auto f = [&](double tau, const V& y) {
    const PlanarState s = PlanarState::FromVector(y);
    return DynamicsDeriv(s, law(tau, s), dist, params);
  };
  const V y = state.AsVector();
  const V k1 = f(t, y);
  const V k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1);
  const V k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2);
  const V k4 = f(t + dt, y + dt * k3);
  PlanarState next =
      PlanarState::FromVector(y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  next.theta = WrapAngle(next.theta);
  return next;
}

PlanarState TrimInitialState(const DisturbanceSpec& dist,
                             const PhysicalParams& params) {
  PlanarState s;
  if (!dist.constant_x) return s;
  // With F cos(theta) = m g the horizontal balance reads
  //   -g tan(theta) - c + k sin(theta) = 0.
  const double g = params.gravity;
  const double k = dist.pitch_coupling_x ? kPitchCouplingX : 0.0;
  double theta = -std::atan(kConstantXAccel / g);
  for (int i = 0; i < 50; ++i) {
    const double c = std::cos(theta);
    const double r = -g * std::tan(theta) - kConstantXAccel +
                     k * std::sin(theta);
    const double dr = -g / (c * c) + k * c;
    const double step = r / dr;
    theta -= step;
    if (std::abs(step) < 1e-15) break;
  }
  s.theta = theta;
  return s;
}

PlanarState InitialStateForSet(DisturbanceSet set,
                               const PhysicalParams& params) {
  return TrimInitialState(DisturbancesFor(set), params);
}

double TrimThrust(const PlanarState& trim, const DisturbanceSpec& dist,
                  const PhysicalParams& params) {
  return PlantMass(dist, params) * params.gravity / std::cos(trim.theta);
}

ControllerOutput ControllerStep(const TrajectoryPoint& ref,
                                const PlanarState& state,
                                const LinearErrorModel* model,
                                const SimConfig& cfg,
                                const std::optional<Vec3>& prev_u) {
  const StateVec actual = state.Embedded();
  ControllerOutput out;
  out.a_cmd = ref.acc;
  if (cfg.feedback) {
    out.a_cmd += cfg.gains.kp_pos * (ref.pos - actual.pos) +
                 cfg.gains.kd_pos * (ref.vel - actual.vel);
  }
  TrajectoryPoint commanded = ref;
  commanded.acc = out.a_cmd;

  const Strategy strategy =
      model == nullptr ? Strategy::kFF1 : cfg.strategy;
  out.flat =
      GenerateFeedforward(strategy, commanded, model, cfg.params, prev_u);

  const Vec3& z = out.flat.z;
  out.theta_des = std::atan2(-z.x(), z.z());
  const double theta_dot_des = -out.flat.omega.y();
  double theta_ddot = -out.flat.omega_dot.y();
  if (cfg.feedback) {
    theta_ddot += cfg.gains.kp_att * WrapAngle(out.theta_des - state.theta) +
                  cfg.gains.kd_att * (theta_dot_des - state.theta_dot);
  }

  out.input.force = cfg.params.mass * out.flat.u;
  if (out.input.force < 0.0) {
    out.input.force = 0.0;
    out.thrust_clamped = true;
  }
  out.input.torque = cfg.params.inertia * theta_ddot;
  return out;
}

RunLog RunTrajectory(const SimConfig& cfg, const PolySegment& traj,
                     const LinearErrorModel* model) {
  if (!(cfg.dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "time step must be positive");
  }
  const auto steps = static_cast<long>(std::llround(traj.duration / cfg.dt));
  const bool warm_start = cfg.strategy == Strategy::kFF3 ||
                          cfg.strategy == Strategy::kFF5;

  RunLog log;
  log.dt = cfg.dt;
  log.rows.reserve(steps + 1);
  PlanarState state = TrimInitialState(cfg.disturbances, cfg.params);
  std::optional<Vec3> prev_u;

  auto law = [&](double t, const PlanarState& s) {
    return ControllerStep(EvalPolyClamped(traj, t), s, model, cfg, prev_u)
        .input;
  };

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    try {
      const TrajectoryPoint ref = EvalPolyClamped(traj, t);
      const ControllerOutput out =
          ControllerStep(ref, state, model, cfg, prev_u);

      RunLogRow row;
      row.t = t;
      row.state = state;
      row.input = out.input;
      row.u_cmd = out.flat.u_vec;
      row.u_applied = out.input.force / cfg.params.mass * BodyZ(state.theta);
      row.ref = ref;
      row.error = Eigen::Vector2d(ref.pos.x() - state.x,
                                  ref.pos.z() - state.z);
      row.thrust_clamped = out.thrust_clamped;
      log.rows.push_back(row);

      if (warm_start && model != nullptr) prev_u = out.flat.u_vec;
      if (k == steps) break;
      state = Rk4Step(state, t, law, cfg.disturbances, cfg.params, cfg.dt);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (step " +
                                std::to_string(k) + ")");
    }
  }
  return log;
}

std::vector<TrainingSample> ResidualsFromLog(const RunLog& log,
                                             const PhysicalParams& params) {
  std::vector<KinematicSample> samples;
  samples.reserve(log.rows.size());
  for (const RunLogRow& row : log.rows) {
    samples.push_back({row.t, row.state.Embedded(), row.u_applied});
  }
  return ResidualsFromSamples(samples, params, log.dt);
}

void WriteRunLogCsv(std::ostream& os, const RunLog& log) {
  os << "t,x,z,theta,xd,zd,thetad,F,tau,ux,uz,ex,ez\n"
     << std::setprecision(17);
  for (const RunLogRow& r : log.rows) {
    const PlanarState& s = r.state;
    os << r.t << ',' << s.x << ',' << s.z << ',' << s.theta << ','
       << s.x_dot << ',' << s.z_dot << ',' << s.theta_dot << ','
       << r.input.force << ',' << r.input.torque << ',' << r.u_cmd.x() << ','
       << r.u_cmd.z() << ',' << r.error.x() << ',' << r.error.y() << '\n';
  }
}

}  // namespace ffgen
