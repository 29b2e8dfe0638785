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

#ifndef FFGEN_COMMON_H_
#define FFGEN_COMMON_H_

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace ffgen {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

enum class ErrorCode {
  kInvalidArgument,
  kOutOfRange,
  kDegenerateThrust,
  kDegenerateAttitude,
  kNoConvergence,
  kSingularJacobian,
  kSingularSystem,
  kInvalidLog,
  kParse,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Vehicle constants shared by the inversion, the simulator and the learned
// model. Gravity is a magnitude; the world gravity vector is (0, 0, -g).
struct PhysicalParams {
  double mass = 4.19;      // kg, nominal (controller-side) mass
  double gravity = 10.18;  // m/s^2
  double inertia = 0.123;  // kg m^2, planar pitch inertia

  Vec3 GravityVector() const { return Vec3(0.0, 0.0, -gravity); }
  bool Valid() const { return mass > 0.0 && gravity > 0.0 && inertia > 0.0; }
};

// All library failures are reported through this exception; callers that
// need to branch on the failure kind inspect code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ffgen

#endif  // FFGEN_COMMON_H_
