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

// Reference trajectories for the flat outputs: rest-to-rest degree-7
// polynomial segments and two closed analytic primitives, all evaluated
// with exact derivatives up to snap.

#ifndef FFGEN_TRAJECTORY_H_
#define FFGEN_TRAJECTORY_H_

#include <array>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "ffgen/common.h"

namespace ffgen {

// Reference position and its first four time derivatives at time t.
struct TrajectoryPoint {
  double t = 0.0;
  Vec3 pos = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
  Vec3 acc = Vec3::Zero();
  Vec3 jerk = Vec3::Zero();
  Vec3 snap = Vec3::Zero();

  // Derivative of order k in [0, 4]; 0 is position.
  const Vec3& Derivative(int k) const;
  bool AllFinite() const;
};

inline constexpr int kPolyCoeffs = 8;
using AxisCoeffs = std::array<double, kPolyCoeffs>;

// Degree-7 polynomial per axis, coefficients in ascending degree, time local
// to the segment.
struct PolySegment {
  std::array<AxisCoeffs, 3> coeffs{};
  double duration = 1.0;
};

// Solves the 8x8 boundary system per axis for p(0)=start, p(T)=end and zero
// velocity, acceleration and jerk at both ends.
PolySegment FitRestToRestPoly(const Vec3& start_pos, const Vec3& end_pos,
                              double duration);

// Throws kOutOfRange for t outside [0, duration].
TrajectoryPoint EvalPoly(const PolySegment& seg, double t);

// Same as EvalPoly but holds the endpoint value for t past the end.
TrajectoryPoint EvalPolyClamped(const PolySegment& seg, double t);

enum class PrimitiveKind { kCircle, kFigure8 };

// circle:  pos = center + r (cos wt, sin wt, 0)
// figure8: pos = center + r (sin wt, sin wt cos wt, 0)
TrajectoryPoint AnalyticPrimitive(PrimitiveKind kind, double radius,
                                  double angular_rate, const Vec3& center,
                                  double t);

// Max over samples of the infinity norm of each derivative:
// [pos, vel, acc, jerk, snap].
using DerivativeMaxima = std::array<double, 5>;
DerivativeMaxima MaxAbsDerivatives(std::span<const TrajectoryPoint> samples);

// Samples `fn` on [t0, t1] with step h (the endpoint is always included).
std::vector<TrajectoryPoint> SampleTrajectory(
    const std::function<TrajectoryPoint(double)>& fn, double t0, double t1,
    double h);

// CSV columns t,px,py,pz,vx,vy,vz,ax,ay,az,jx,jy,jz,sx,sy,sz.
void WriteTrajectoryCsv(std::ostream& os,
                        std::span<const TrajectoryPoint> samples);

}  // namespace ffgen

#endif  // FFGEN_TRAJECTORY_H_
