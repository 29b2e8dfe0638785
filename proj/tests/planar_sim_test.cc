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

#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "test_support.h"

namespace ffgen {
namespace {

const PhysicalParams kParams;
const double kHoverThrust = 4.19 * 10.18;

template <typename Fn>
void ExpectCode(ErrorCode code, Fn&& fn) {
  try {
    fn();
    FAIL() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

double MaxErrorNorm(const RunLog& log) {
  double m = 0.0;
  for (const RunLogRow& r : log.rows) m = std::max(m, r.error.norm());
  return m;
}

PolySegment ReferenceSegment() {
  return FitRestToRestPoly(Vec3::Zero(), Vec3(1, 0, 1), 1.0);
}

// Planar-map weights that cancel the given disturbances exactly.
Eigen::MatrixXd IdealWeights(const DisturbanceSpec& d) {
  const Eigen::MatrixXd full = testing::SetDIdealWeights();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(8, 3);
  if (d.constant_x) w(7, 0) = full(7, 0);
  if (d.drag_x) w(2, 0) = full(2, 0);
  if (d.pitch_coupling_x) w(4, 0) = full(4, 0);
  if (d.drag_z) w(3, 2) = full(3, 2);
  if (d.mass_offset) {
    w(5, 0) = full(5, 0);
    w(6, 2) = full(6, 2);
  }
  return w;
}

SimConfig OpenLoop(DisturbanceSet set, Strategy s) {
  SimConfig cfg;
  cfg.feedback = false;
  cfg.strategy = s;
  cfg.disturbances = DisturbancesFor(set);
  return cfg;
}

TEST(DisturbanceSets, Composition) {
  const DisturbanceSpec a = DisturbancesFor(DisturbanceSet::kA);
  EXPECT_TRUE(a.constant_x && !a.drag_x && !a.pitch_coupling_x &&
              !a.drag_z && !a.mass_offset);
  const DisturbanceSpec b = DisturbancesFor(DisturbanceSet::kB);
  EXPECT_TRUE(b.constant_x && b.drag_x && b.drag_z && !b.pitch_coupling_x &&
              !b.mass_offset);
  const DisturbanceSpec c = DisturbancesFor(DisturbanceSet::kC);
  EXPECT_TRUE(!c.constant_x && c.pitch_coupling_x && c.mass_offset &&
              !c.drag_x && !c.drag_z);
  const DisturbanceSpec d = DisturbancesFor(DisturbanceSet::kD);
  EXPECT_TRUE(d.constant_x && d.drag_x && d.pitch_coupling_x && d.drag_z &&
              d.mass_offset);
  EXPECT_FALSE(DisturbanceSpec{}.Any());
  for (auto s : {DisturbanceSet::kA, DisturbanceSet::kB, DisturbanceSet::kC,
                 DisturbanceSet::kD}) {
    EXPECT_EQ(ParseDisturbanceSet(DisturbanceSetName(s)), s);
  }
  EXPECT_EQ(ParseDisturbanceSet("d"), DisturbanceSet::kD);
  EXPECT_THROW(ParseDisturbanceSet("E"), Error);
}

TEST(DynamicsDeriv, HoverBalance) {
  const auto d = DynamicsDeriv(PlanarState{}, {kHoverThrust, 0.0}, {}, kParams);
  EXPECT_NEAR(d.norm(), 0.0, 1e-14);
}

TEST(DynamicsDeriv, ConstantDisturbance) {
  DisturbanceSpec dist;
  dist.constant_x = true;
  const auto d = DynamicsDeriv(PlanarState{}, {kHoverThrust, 0.0}, dist,
                               kParams);
  EXPECT_DOUBLE_EQ(d(3), -4.1);
  EXPECT_NEAR(d(4), 0.0, 1e-14);
}

TEST(DynamicsDeriv, MassOffset) {
  DisturbanceSpec dist;
  dist.mass_offset = true;
  const auto d = DynamicsDeriv(PlanarState{}, {42.654, 0.0}, dist, kParams);
  EXPECT_NEAR(d(4), 42.654 / 6.19 - 10.18, 1e-12);
  EXPECT_NEAR(d(4), -3.289, 1e-3);
}

TEST(DynamicsDeriv, EachTerm) {
  PlanarState s;
  s.theta = 0.3;
  s.x_dot = 0.7;
  s.z_dot = -0.4;
  const PlanarInput in{30.0, 0.5};
  const auto base = DynamicsDeriv(s, in, {}, kParams);
  EXPECT_NEAR(base(3), -30.0 / 4.19 * std::sin(0.3), 1e-14);
  EXPECT_NEAR(base(4), 30.0 / 4.19 * std::cos(0.3) - 10.18, 1e-14);
  EXPECT_NEAR(base(5), 0.5 / 0.123, 1e-12);
  EXPECT_EQ(base.head<3>(), Eigen::Vector3d(0.7, -0.4, 0.0));
  DisturbanceSpec d;
  d.drag_x = true;
  EXPECT_NEAR(DynamicsDeriv(s, in, d, kParams)(3) - base(3), -3.1 * 0.7,
              1e-14);
  d = {};
  d.pitch_coupling_x = true;
  EXPECT_NEAR(DynamicsDeriv(s, in, d, kParams)(3) - base(3),
              1.4 * std::sin(0.3), 1e-14);
  d = {};
  d.drag_z = true;
  EXPECT_NEAR(DynamicsDeriv(s, in, d, kParams)(4) - base(4), 3.1 * 0.4,
              1e-14);
  d = {};
  d.mass_offset = true;
  // Inertia is unchanged by the mass offset.
  EXPECT_EQ(DynamicsDeriv(s, in, d, kParams)(5), base(5));
}

TEST(Rk4Step, Equilibrium) {
  const PlanarState s{1.0, 2.0, 0.0, 0.0, 0.0, 0.0};
  const PlanarState next = Rk4Step(s, {kHoverThrust, 0.0}, {}, kParams, 0.01);
  EXPECT_NEAR((next.AsVector() - s.AsVector()).norm(), 0.0, 1e-14);
}

TEST(Rk4Step, BallisticIsExact) {
  const PlanarState s{0.5, 3.0, 0.2, 1.5, 2.0, 0.0};
  for (double dt : {1e-3, 0.1, 0.5}) {
    const PlanarState next = Rk4Step(s, {0.0, 0.0}, {}, kParams, dt);
    EXPECT_NEAR(next.z, 3.0 + 2.0 * dt - 0.5 * 10.18 * dt * dt, 1e-13);
    EXPECT_NEAR(next.z_dot, 2.0 - 10.18 * dt, 1e-13);
    EXPECT_NEAR(next.x, 0.5 + 1.5 * dt, 1e-14);
    EXPECT_EQ(next.theta, 0.2);
  }
}

TEST(Rk4Step, FourthOrderConvergence) {
  const DisturbanceSpec dist = DisturbancesFor(DisturbanceSet::kD);
  const PlanarInput in{50.0, 0.2};
  auto integrate = [&](double dt) {
    PlanarState s{0, 0, 0.1, 0.5, -0.2, 0.3};
    const int n = static_cast<int>(std::lround(1.0 / dt));
    for (int k = 0; k < n; ++k) s = Rk4Step(s, in, dist, kParams, dt);
    return s.AsVector();
  };
  const auto truth = integrate(1e-4);
  const double e1 = (integrate(0.02) - truth).norm();
  const double e2 = (integrate(0.01) - truth).norm();
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(Rk4Step, WrapsTheta) {
  PlanarState s;
  s.theta = M_PI - 0.01;
  s.theta_dot = 2.0;
  const PlanarState next = Rk4Step(s, {0.0, 0.0}, {}, kParams, 0.01);
  EXPECT_GT(next.theta, -M_PI);
  EXPECT_LE(next.theta, M_PI);
  EXPECT_NEAR(next.theta, -M_PI + 0.01, 1e-12);
}

TEST(Rk4Step, InputLawPerStage) {
  // Input law that equals a held input reproduces the held-input step.
  const PlanarState s{0, 0, 0.1, 0.5, -0.2, 0.3};
  const PlanarInput in{40.0, -0.1};
  const DisturbanceSpec dist = DisturbancesFor(DisturbanceSet::kB);
  const PlanarState a = Rk4Step(s, in, dist, kParams, 0.01);
  const PlanarState b = Rk4Step(
      s, 0.0, [&](double, const PlanarState&) { return in; }, dist, kParams,
      0.01);
  EXPECT_EQ(a.AsVector(), b.AsVector());
}

TEST(Energy, FreeFlightConservation) {
  PlanarState s{0.0, 10.0, 0.4, 1.2, 3.0, 2.0};
  auto energy = [](const PlanarState& p) {
    return 0.5 * 4.19 * (p.x_dot * p.x_dot + p.z_dot * p.z_dot) +
           4.19 * 10.18 * p.z + 0.5 * 0.123 * p.theta_dot * p.theta_dot;
  };
  const double e0 = energy(s);
  for (int k = 0; k < 1000; ++k) s = Rk4Step(s, {0.0, 0.0}, {}, kParams, 1e-3);
  EXPECT_LE(std::abs(energy(s) - e0), 1e-8 * std::abs(e0));
}

TEST(InitialState, SetA) {
  const PlanarState a = InitialStateForSet(DisturbanceSet::kA);
  EXPECT_NEAR(a.theta, -std::atan(4.1 / 10.18), 1e-15);
  EXPECT_NEAR(a.theta, -0.38294, 1e-4);
  EXPECT_EQ(a.x, 0.0);
  EXPECT_EQ(a.theta_dot, 0.0);
  const DisturbanceSpec dist = DisturbancesFor(DisturbanceSet::kA);
  const double f = TrimThrust(a, dist, kParams);
  const auto d = DynamicsDeriv(a, {f, 0.0}, dist, kParams);
  EXPECT_NEAR(d.segment<3>(3).norm(), 0.0, 1e-13);
}

TEST(InitialState, TrimForEverySetWithConstantDisturbance) {
  // Sets B and D also start at rest in their trim attitude; C starts level.
  EXPECT_EQ(InitialStateForSet(DisturbanceSet::kB).theta,
            InitialStateForSet(DisturbanceSet::kA).theta);
  EXPECT_EQ(InitialStateForSet(DisturbanceSet::kC).AsVector(),
            PlanarState{}.AsVector());
  const PlanarState d = InitialStateForSet(DisturbanceSet::kD);
  const DisturbanceSpec dist = DisturbancesFor(DisturbanceSet::kD);
  const auto deriv =
      DynamicsDeriv(d, {TrimThrust(d, dist, kParams), 0.0}, dist, kParams);
  EXPECT_NEAR(deriv.segment<3>(3).norm(), 0.0, 1e-13);
  EXPECT_EQ(InitialStateForSet(DisturbanceSet::kD, PhysicalParams{}).x, 0.0);
}

TEST(InitialState, TrimInvariance) {
  const DisturbanceSpec dist = DisturbancesFor(DisturbanceSet::kA);
  PlanarState s = InitialStateForSet(DisturbanceSet::kA);
  const PlanarInput in{TrimThrust(s, dist, kParams), 0.0};
  for (int k = 0; k < 1000; ++k) s = Rk4Step(s, in, dist, kParams, 1e-3);
  EXPECT_LE(std::hypot(s.x, s.z), 1e-9);
}

TEST(ControllerStep, HoverFF1) {
  SimConfig cfg;
  const ControllerOutput out =
      ControllerStep(TrajectoryPoint{}, PlanarState{}, nullptr, cfg, {});
  EXPECT_NEAR(out.input.force, 42.654, 1e-3);
  EXPECT_DOUBLE_EQ(out.input.force, kHoverThrust);
  EXPECT_EQ(out.input.torque, 0.0);
  EXPECT_FALSE(out.thrust_clamped);
}

TEST(ControllerStep, PositionFeedback) {
  SimConfig cfg;
  TrajectoryPoint ref;
  ref.pos = Vec3(0.1, 0, 0);
  const ControllerOutput out =
      ControllerStep(ref, PlanarState{}, nullptr, cfg, {});
  EXPECT_NEAR((out.a_cmd - Vec3(1.0, 0, 0)).norm(), 0.0, 1e-15);
  cfg.feedback = false;
  EXPECT_TRUE(ControllerStep(ref, PlanarState{}, nullptr, cfg, {})
                  .a_cmd.isZero(0));
}

TEST(ControllerStep, SetAModelTrimAngle) {
  SimConfig cfg;
  cfg.feedback = false;
  cfg.strategy = Strategy::kFF2;
  const LinearErrorModel m(MakePlanarFeatureMap(4.19),
                           IdealWeights(DisturbancesFor(DisturbanceSet::kA)));
  const ControllerOutput out =
      ControllerStep(TrajectoryPoint{}, PlanarState{}, &m, cfg, {});
  EXPECT_NEAR(out.theta_des, -std::atan(4.1 / 10.18), 1e-14);
  EXPECT_NEAR(out.theta_des, -0.38294, 1e-4);
}

TEST(ControllerStep, AttitudeFeedback) {
  SimConfig cfg;
  PlanarState s;
  s.theta = 0.01;
  s.theta_dot = -0.02;
  const ControllerOutput out =
      ControllerStep(TrajectoryPoint{}, s, nullptr, cfg, {});
  EXPECT_NEAR(out.input.torque, 0.123 * (300 * -0.01 + 30 * 0.02), 1e-12);
}

TEST(ControllerStep, PitchSignConvention) {
  // A positive x acceleration demand tilts the vehicle to negative theta and
  // the plant then accelerates toward +x.
  SimConfig cfg;
  cfg.feedback = false;
  TrajectoryPoint ref;
  ref.acc = Vec3(2, 0, 0);
  const ControllerOutput out =
      ControllerStep(ref, PlanarState{}, nullptr, cfg, {});
  EXPECT_LT(out.theta_des, 0.0);
  PlanarState tilted;
  tilted.theta = out.theta_des;
  const auto d = DynamicsDeriv(tilted, out.input, {}, kParams);
  EXPECT_NEAR(d(3), 2.0, 1e-12);
  EXPECT_NEAR(d(4), 0.0, 1e-12);
}

TEST(RunTrajectory, UndisturbedFeedforwardIsExact) {
  SimConfig cfg;
  cfg.feedback = false;
  const RunLog log = RunTrajectory(cfg, ReferenceSegment(), nullptr);
  EXPECT_EQ(log.rows.size(), 1001u);
  EXPECT_LE(MaxErrorNorm(log), 1e-6);
}

TEST(RunTrajectory, SetAFF1OpenLoop) {
  const RunLog log = RunTrajectory(OpenLoop(DisturbanceSet::kA, Strategy::kFF1),
                                   ReferenceSegment(), nullptr);
  EXPECT_NEAR(MaxErrorNorm(log), 0.829, 0.05 * 0.829);
}

TEST(RunTrajectory, Determinism) {
  SimConfig cfg = OpenLoop(DisturbanceSet::kD, Strategy::kFF5);
  cfg.feedback = true;
  const LinearErrorModel m(MakePlanarFeatureMap(4.19),
                           testing::SetDIdealWeights() * 0.7);
  const RunLog a = RunTrajectory(cfg, ReferenceSegment(), &m);
  const RunLog b = RunTrajectory(cfg, ReferenceSegment(), &m);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  std::ostringstream sa, sb;
  WriteRunLogCsv(sa, a);
  WriteRunLogCsv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  for (size_t k = 0; k < a.rows.size(); ++k) {
    ASSERT_EQ(a.rows[k].state.AsVector(), b.rows[k].state.AsVector());
    ASSERT_EQ(a.rows[k].u_cmd, b.rows[k].u_cmd);
  }
}

TEST(RunTrajectory, ExactModelZeroError) {
  struct Case {
    DisturbanceSet set;
    Strategy strategy;
  };
  for (const Case c :
       {Case{DisturbanceSet::kA, Strategy::kFF4},
        Case{DisturbanceSet::kB, Strategy::kFF4},
        Case{DisturbanceSet::kA, Strategy::kFF5},
        Case{DisturbanceSet::kB, Strategy::kFF5},
        Case{DisturbanceSet::kC, Strategy::kFF5},
        Case{DisturbanceSet::kD, Strategy::kFF5}}) {
    const SimConfig cfg = OpenLoop(c.set, c.strategy);
    const LinearErrorModel m(MakePlanarFeatureMap(4.19),
                             IdealWeights(cfg.disturbances));
    const RunLog log = RunTrajectory(cfg, ReferenceSegment(), &m);
    EXPECT_LE(MaxErrorNorm(log), 2e-3)
        << DisturbanceSetName(c.set) << ' ' << StrategyName(c.strategy);
  }
}

TEST(RunTrajectory, DegenerateThrustReportsStep) {
  PolySegment freefall;
  freefall.coeffs[2][2] = -0.5 * 10.18;
  SimConfig cfg;
  cfg.feedback = false;
  try {
    RunTrajectory(cfg, freefall, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateThrust);
    EXPECT_NE(std::string(e.what()).find("step 0"), std::string::npos);
  }
  cfg.dt = 0.0;
  ExpectCode(ErrorCode::kInvalidArgument,
             [&] { RunTrajectory(cfg, ReferenceSegment(), nullptr); });
}

TEST(ResidualsFromLog, SetATrimHover) {
  const SimConfig cfg = OpenLoop(DisturbanceSet::kA, Strategy::kFF1);
  const PolySegment hover = FitRestToRestPoly(Vec3::Zero(), Vec3::Zero(), 1.0);
  const RunLog log = RunTrajectory(cfg, hover, nullptr);
  const auto samples = ResidualsFromLog(log, kParams);
  ASSERT_EQ(samples.size(), log.rows.size() - 2);
  for (const TrainingSample& s : samples) {
    EXPECT_NEAR(s.residual.x(), -4.1, 1e-4);
    EXPECT_NEAR(s.residual.z(), 0.0, 1e-4);
  }
}

TEST(ResidualsFromLog, SetDIdealModelExplainsResiduals) {
  SimConfig cfg = OpenLoop(DisturbanceSet::kD, Strategy::kFF1);
  cfg.feedback = true;
  const RunLog log = RunTrajectory(cfg, ReferenceSegment(), nullptr);
  const LinearErrorModel m(MakePlanarFeatureMap(4.19),
                           testing::SetDIdealWeights());
  for (const TrainingSample& s : ResidualsFromLog(log, kParams)) {
    ASSERT_LT((m.Evaluate(s.eta, s.u_vec) - s.residual).norm(), 1e-3);
  }
}

TEST(RunLogCsv, Layout) {
  const RunLog log = RunTrajectory(OpenLoop(DisturbanceSet::kC, Strategy::kFF1),
                                   ReferenceSegment(), nullptr);
  std::ostringstream os;
  WriteRunLogCsv(os, log);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x,z,theta,xd,zd,thetad,F,tau,ux,uz,ex,ez");
  size_t rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    ASSERT_EQ(std::count(line.begin(), line.end(), ','), 12);
  }
  EXPECT_EQ(rows, log.rows.size());
}

}  // namespace
}  // namespace ffgen
