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

#include "ffgen/trajectory.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include <Eigen/LU>

namespace ffgen {

namespace {

using Mat8 = Eigen::Matrix<double, kPolyCoeffs, kPolyCoeffs>;
using Vec8 = Eigen::Matrix<double, kPolyCoeffs, 1>;

// Row of d^k/dt^k [1, t, ..., t^7].
Vec8 BasisRow(double t, int k) {
  Vec8 row = Vec8::Zero();
  for (int n = k; n < kPolyCoeffs; ++n) {
    double factor = 1.0;
    for (int j = 0; j < k; ++j) factor *= n - j;
    row(n) = factor * std::pow(t, n - k);
  }
  return row;
}

// Horner evaluation of the k-th derivative.
double EvalAxis(const AxisCoeffs& c, double t, int k) {
  double value = 0.0;
  for (int n = kPolyCoeffs - 1; n >= k; --n) {
    double factor = 1.0;
    for (int j = 0; j < k; ++j) factor *= n - j;
    value = value * t + factor * c[n];
  }
  return value;
}

}  // namespace

const Vec3& TrajectoryPoint::Derivative(int k) const {
  switch (k) {
    case 0: return pos;
    case 1: return vel;
    case 2: return acc;
    case 3: return jerk;
    case 4: return snap;
    default:
      throw Error(ErrorCode::kOutOfRange, "derivative order must be 0..4");
  }
}

bool TrajectoryPoint::AllFinite() const {
  return std::isfinite(t) && pos.allFinite() && vel.allFinite() &&
         acc.allFinite() && jerk.allFinite() && snap.allFinite();
}

PolySegment FitRestToRestPoly(const Vec3& start_pos, const Vec3& end_pos,
                              double duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorCode::kInvalidArgument,
                "polynomial duration must be positive");
  }
  // Rows 0-3: derivatives 0..3 at t=0; rows 4-7: the same at t=T.
  Mat8 a;
  for (int k = 0; k < 4; ++k) {
    a.row(k) = BasisRow(0.0, k).transpose();
    a.row(4 + k) = BasisRow(duration, k).transpose();
  }
  const Eigen::PartialPivLU<Mat8> lu(a);

  PolySegment seg;
  seg.duration = duration;
  for (int axis = 0; axis < 3; ++axis) {
    Vec8 b = Vec8::Zero();
    b(0) = start_pos(axis);
    b(4) = end_pos(axis);
    const Vec8 x = lu.solve(b);
    for (int n = 0; n < kPolyCoeffs; ++n) seg.coeffs[axis][n] = x(n);
  }
  return seg;
}

TrajectoryPoint EvalPoly(const PolySegment& seg, double t) {
  if (!(t >= 0.0 && t <= seg.duration)) {
    throw Error(ErrorCode::kOutOfRange, "time outside polynomial segment");
  }
  TrajectoryPoint p;
  p.t = t;
  for (int axis = 0; axis < 3; ++axis) {
    const AxisCoeffs& c = seg.coeffs[axis];
    p.pos(axis) = EvalAxis(c, t, 0);
    p.vel(axis) = EvalAxis(c, t, 1);
    p.acc(axis) = EvalAxis(c, t, 2);
    p.jerk(axis) = EvalAxis(c, t, 3);
    p.snap(axis) = EvalAxis(c, t, 4);
  }
  return p;
}

TrajectoryPoint EvalPolyClamped(const PolySegment& seg, double t) {
  TrajectoryPoint p = EvalPoly(seg, std::clamp(t, 0.0, seg.duration));
  p.t = t;
  return p;
}

TrajectoryPoint AnalyticPrimitive(PrimitiveKind kind, double radius,
                                  double angular_rate, const Vec3& center,
                                  double t) {
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "radius must be positive");
  }
  const double r = radius;
  const double w = angular_rate;
  TrajectoryPoint p;
  p.t = t;
  if (kind == PrimitiveKind::kCircle) {
    const double c = std::cos(w * t);
    const double s = std::sin(w * t);
    const double w2 = w * w;
    p.pos = center + r * Vec3(c, s, 0.0);
    p.vel = r * w * Vec3(-s, c, 0.0);
    p.acc = r * w2 * Vec3(-c, -s, 0.0);
    p.jerk = r * w2 * w * Vec3(s, -c, 0.0);
    p.snap = r * w2 * w2 * Vec3(c, s, 0.0);
    return p;
  }
  // y = r sin(wt) cos(wt) = (r/2) sin(2wt).
  const double s1 = std::sin(w * t);
  const double c1 = std::cos(w * t);
  const double s2 = std::sin(2.0 * w * t);
  const double c2 = std::cos(2.0 * w * t);
  const double hw = 0.5 * r;
  p.pos = center + Vec3(r * s1, hw * s2, 0.0);
  p.vel = Vec3(r * w * c1, hw * 2.0 * w * c2, 0.0);
  p.acc = Vec3(-r * w * w * s1, -hw * 4.0 * w * w * s2, 0.0);
  p.jerk = Vec3(-r * w * w * w * c1, -hw * 8.0 * w * w * w * c2, 0.0);
  p.snap = Vec3(r * w * w * w * w * s1, hw * 16.0 * w * w * w * w * s2, 0.0);
  return p;
}

DerivativeMaxima MaxAbsDerivatives(std::span<const TrajectoryPoint> samples) {
  if (samples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no trajectory samples");
  }
  DerivativeMaxima out{};
  for (const TrajectoryPoint& p : samples) {
    for (int k = 0; k < 5; ++k) {
      out[k] = std::max(out[k], p.Derivative(k).cwiseAbs().maxCoeff());
    }
  }
  return out;
}

std::vector<TrajectoryPoint> SampleTrajectory(
    const std::function<TrajectoryPoint(double)>& fn, double t0, double t1,
    double h) {
  if (!(h > 0.0) || !(t1 >= t0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid sampling interval");
  }
  const auto n = static_cast<long>(std::floor((t1 - t0) / h + 1e-9));
  std::vector<TrajectoryPoint> out;
  out.reserve(n + 2);
  for (long i = 0; i <= n; ++i) out.push_back(fn(t0 + i * h));
  if (t0 + n * h < t1 - 1e-12) out.push_back(fn(t1));
  return out;
}

void WriteTrajectoryCsv(std::ostream& os,
                        std::span<const TrajectoryPoint> samples) {
  os << "t,px,py,pz,vx,vy,vz,ax,ay,az,jx,jy,jz,sx,sy,sz\n";
  os << std::setprecision(17);
  for (const TrajectoryPoint& p : samples) {
    os << p.t;
    for (int k = 0; k < 5; ++k) {
      const Vec3& d = p.Derivative(k);
      os << ',' << d.x() << ',' << d.y() << ',' << d.z();
    }
    os << '\n';
  }
}

}  // namespace ffgen
