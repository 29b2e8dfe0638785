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

// Learned additive acceleration error f_e(eta, u) = W^T phi(eta, u).
//
// eta stacks position and velocity (6 entries), u is the commanded
// acceleration vector (3 entries). Every feature map supplies phi together
// with its exact first and second partials so the inversion can propagate
// the model through time derivatives.

#ifndef FFGEN_ERROR_MODEL_H_
#define FFGEN_ERROR_MODEL_H_

#include <array>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ffgen/common.h"

namespace ffgen {

struct StateVec {
  Vec3 pos = Vec3::Zero();
  Vec3 vel = Vec3::Zero();

  Vec6 Stacked() const;
  static StateVec FromStacked(const Vec6& eta);
};

// phi and its partials at one (eta, u). Second-partial containers hold one
// matrix per feature.
struct FeatureEval {
  Eigen::VectorXd value;
  Eigen::MatrixXd d_eta;                // dim x 6
  Eigen::MatrixXd d_u;                  // dim x 3
  std::vector<Mat6> d_eta_eta;          // [k](a, b) = d2 phi_k / deta_a deta_b
  std::vector<Mat3> d_u_u;              // [k](a, b) = d2 phi_k / du_a du_b
  std::vector<Mat36> d_u_eta;           // [k](a, b) = d2 phi_k / du_a deta_b

  explicit FeatureEval(int dim = 0);
};

class FeatureMap {
 public:
  // The evaluator fills value always; partials only when `derivatives` is
  // set (the fields are pre-sized and zeroed by the caller).
  using Evaluator = std::function<void(const Vec6& eta, const Vec3& u,
                                       bool derivatives, FeatureEval& out)>;

  FeatureMap(std::string name, int dim, double parameter,
             bool depends_on_input, Evaluator evaluator);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  // Map-specific constant (nominal mass for the planar map, unused otherwise).
  double parameter() const { return parameter_; }
  bool depends_on_input() const { return depends_on_input_; }

  Eigen::VectorXd Value(const Vec6& eta, const Vec3& u) const;
  FeatureEval Evaluate(const Vec6& eta, const Vec3& u) const;

 private:
  std::string name_;
  int dim_;
  double parameter_;
  bool depends_on_input_;
  Evaluator evaluator_;
};

// [x, z, vx, vz, sin(theta), F sin(theta), F cos(theta), 1] for the planar
// vehicle, with thrust and pitch recovered from u:
//   F sin(theta) = -m u_x,  F cos(theta) = m u_z,  sin(theta) = -u_x / |u|.
// Throws kDegenerateAttitude when |u| < 1e-9.
FeatureMap MakePlanarFeatureMap(double nominal_mass);

// [vx, vy, vz, ux, uy, uz, 1].
FeatureMap MakeVelocityInputFeatureMap();

// Rebuilds a built-in map from its serialized name and parameter.
FeatureMap FeatureMapByName(const std::string& name, double parameter);

struct ErrorModelJacobians {
  Mat36 d_eta = Mat36::Zero();
  Mat3 d_u = Mat3::Zero();
};

// Second partials as third-order arrays; index [i] selects the output axis.
struct ErrorModelHessians {
  std::array<Mat6, 3> eta_eta;
  std::array<Mat3, 3> u_u;
  std::array<Mat36, 3> u_eta;  // [i](a, b) = d2 f_i / du_a deta_b

  ErrorModelHessians();
};

class LinearErrorModel {
 public:
  // weights is dim x 3; column i produces output axis i.
  LinearErrorModel(FeatureMap map, Eigen::MatrixXd weights);

  static LinearErrorModel Zero(FeatureMap map);

  const FeatureMap& feature_map() const { return map_; }
  const Eigen::MatrixXd& weights() const { return weights_; }

  Vec3 Evaluate(const StateVec& eta, const Vec3& u_vec) const;
  ErrorModelJacobians Jacobians(const StateVec& eta, const Vec3& u_vec) const;
  ErrorModelHessians Hessians(const StateVec& eta, const Vec3& u_vec) const;

  // Static property of the feature map; the weights are not inspected.
  bool DependsOnInput() const { return map_.depends_on_input(); }

  LinearErrorModel operator+(const LinearErrorModel& other) const;

 private:
  FeatureMap map_;
  Eigen::MatrixXd weights_;
};

// Observed minus predicted acceleration at one logged instant.
struct TrainingSample {
  StateVec eta;
  Vec3 u_vec = Vec3::Zero();
  Vec3 residual = Vec3::Zero();
};

// One row of a uniformly sampled flight record.
struct KinematicSample {
  double t = 0.0;
  StateVec eta;
  Vec3 u_vec = Vec3::Zero();
};

// Observed acceleration is the central difference of logged velocity;
// predicted is u_vec + g_world. The first and last samples are dropped.
// Throws kInvalidLog for fewer than 3 samples, non-uniform timestamps
// (jitter > 1e-9 s) or a spacing that disagrees with fd_step.
std::vector<TrainingSample> ResidualsFromSamples(
    std::span<const KinematicSample> log, const PhysicalParams& params,
    double fd_step);

inline constexpr double kDefaultRidge = 1e-8;

// Minimizes sum |W^T phi_i - r_i|^2 + ridge |W|^2.
LinearErrorModel FitErrorModel(std::span<const TrainingSample> samples,
                               const FeatureMap& map,
                               double ridge = kDefaultRidge);

// Value of the regularized objective; used to check optimality.
double FitObjective(std::span<const TrainingSample> samples,
                    const LinearErrorModel& model, double ridge);

// Versioned text format: header, feature-map name and parameter, dim, then
// W row by row with 17 significant digits.
void WriteErrorModel(std::ostream& os, const LinearErrorModel& model);
LinearErrorModel ReadErrorModel(std::istream& is);

// CSV columns x,y,z,vx,vy,vz,ux,uy,uz,rx,ry,rz.
void WriteTrainingCsv(std::ostream& os,
                      std::span<const TrainingSample> samples);

}  // namespace ffgen

#endif  // FFGEN_ERROR_MODEL_H_
