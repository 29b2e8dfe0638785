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

#include "ffgen/error_model.h"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <utility>

#include <Eigen/QR>

namespace ffgen {

namespace {

constexpr char kModelHeader[] = "ffgen-error-model";
constexpr int kModelVersion = 1;
constexpr double kMinInputNorm = 1e-9;

constexpr char kPlanarName[] = "planar8";
constexpr char kVelocityInputName[] = "vel_input7";

// eta layout: x y z vx vy vz
enum : int { kX = 0, kY = 1, kZ = 2, kVx = 3, kVy = 4, kVz = 5 };

}  // namespace

Vec6 StateVec::Stacked() const {
  Vec6 eta;
  eta << pos, vel;
  return eta;
}

StateVec StateVec::FromStacked(const Vec6& eta) {
  return StateVec{eta.head<3>(), eta.tail<3>()};
}

FeatureEval::FeatureEval(int dim)
    : value(Eigen::VectorXd::Zero(dim)),
      d_eta(Eigen::MatrixXd::Zero(dim, 6)),
      d_u(Eigen::MatrixXd::Zero(dim, 3)),
      d_eta_eta(dim, Mat6::Zero()),
      d_u_u(dim, Mat3::Zero()),
      d_u_eta(dim, Mat36::Zero()) {}

FeatureMap::FeatureMap(std::string name, int dim, double parameter,
                       bool depends_on_input, Evaluator evaluator)
    : name_(std::move(name)),
      dim_(dim),
      parameter_(parameter),
      depends_on_input_(depends_on_input),
      evaluator_(std::move(evaluator)) {
  if (dim_ <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "feature dimension must be > 0");
  }
}

Eigen::VectorXd FeatureMap::Value(const Vec6& eta, const Vec3& u) const {
  FeatureEval out(0);
  out.value = Eigen::VectorXd::Zero(dim_);
  evaluator_(eta, u, false, out);
  return out.value;
}

FeatureEval FeatureMap::Evaluate(const Vec6& eta, const Vec3& u) const {
  FeatureEval out(dim_);
  evaluator_(eta, u, true, out);
  return out;
}

FeatureMap MakePlanarFeatureMap(double nominal_mass) {
  if (!(nominal_mass > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "nominal mass must be positive");
  }
  const double m = nominal_mass;
  auto eval = [m](const Vec6& eta, const Vec3& u, bool derivatives,
                  FeatureEval& out) {
    const double n = u.norm();
    if (!(n >= kMinInputNorm)) {
      throw Error(ErrorCode::kDegenerateAttitude,
                  "commanded acceleration too small to define attitude");
    }
    out.value << eta(kX), eta(kZ), eta(kVx), eta(kVz), -u.x() / n,
        -m * u.x(), m * u.z(), 1.0;
    if (!derivatives) return;

    out.d_eta(0, kX) = 1.0;
    out.d_eta(1, kZ) = 1.0;
    out.d_eta(2, kVx) = 1.0;
    out.d_eta(3, kVz) = 1.0;

    // sin(theta) = -u_x / |u|
    const double n3 = n * n * n;
    const double n5 = n3 * n * n;
    for (int a = 0; a < 3; ++a) {
      out.d_u(4, a) = (a == 0 ? -1.0 / n : 0.0) + u.x() * u(a) / n3;
      for (int b = 0; b < 3; ++b) {
        const double da0 = a == 0 ? 1.0 : 0.0;
        const double db0 = b == 0 ? 1.0 : 0.0;
        const double dab = a == b ? 1.0 : 0.0;
        out.d_u_u[4](a, b) = (da0 * u(b) + db0 * u(a) + u.x() * dab) / n3 -
                             3.0 * u.x() * u(a) * u(b) / n5;
      }
    }
    out.d_u(5, 0) = -m;
    out.d_u(6, 2) = m;
  };
  return FeatureMap(kPlanarName, 8, m, true, eval);
}

FeatureMap MakeVelocityInputFeatureMap() {
  auto eval = [](const Vec6& eta, const Vec3& u, bool derivatives,
                 FeatureEval& out) {
    out.value << eta(kVx), eta(kVy), eta(kVz), u.x(), u.y(), u.z(), 1.0;
    if (!derivatives) return;
    for (int i = 0; i < 3; ++i) {
      out.d_eta(i, kVx + i) = 1.0;
      out.d_u(3 + i, i) = 1.0;
    }
  };
  return FeatureMap(kVelocityInputName, 7, 0.0, true, eval);
}

FeatureMap FeatureMapByName(const std::string& name, double parameter) {
  if (name == kPlanarName) return MakePlanarFeatureMap(parameter);
  if (name == kVelocityInputName) return MakeVelocityInputFeatureMap();
  throw Error(ErrorCode::kInvalidArgument, "unknown feature map: " + name);
}

ErrorModelHessians::ErrorModelHessians() {
  eta_eta.fill(Mat6::Zero());
  u_u.fill(Mat3::Zero());
  u_eta.fill(Mat36::Zero());
}

LinearErrorModel::LinearErrorModel(FeatureMap map, Eigen::MatrixXd weights)
    : map_(std::move(map)), weights_(std::move(weights)) {
  if (weights_.rows() != map_.dim() || weights_.cols() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "weight matrix must be dim x 3 for feature map " +
                    map_.name());
  }
}

LinearErrorModel LinearErrorModel::Zero(FeatureMap map) {
  const int dim = map.dim();
  return LinearErrorModel(std::move(map), Eigen::MatrixXd::Zero(dim, 3));
}

Vec3 LinearErrorModel::Evaluate(const StateVec& eta, const Vec3& u_vec) const {
  return weights_.transpose() * map_.Value(eta.Stacked(), u_vec);
}

ErrorModelJacobians LinearErrorModel::Jacobians(const StateVec& eta,
                                                const Vec3& u_vec) const {
  const FeatureEval fe = map_.Evaluate(eta.Stacked(), u_vec);
  ErrorModelJacobians j;
  j.d_eta = weights_.transpose() * fe.d_eta;
  j.d_u = weights_.transpose() * fe.d_u;
  return j;
}

ErrorModelHessians LinearErrorModel::Hessians(const StateVec& eta,
                                              const Vec3& u_vec) const {
  const FeatureEval fe = map_.Evaluate(eta.Stacked(), u_vec);
  ErrorModelHessians h;
  for (int k = 0; k < map_.dim(); ++k) {
    for (int i = 0; i < 3; ++i) {
      const double w = weights_(k, i);
      if (w == 0.0) continue;
      h.eta_eta[i] += w * fe.d_eta_eta[k];
      h.u_u[i] += w * fe.d_u_u[k];
      h.u_eta[i] += w * fe.d_u_eta[k];
    }
  }
  return h;
}

LinearErrorModel LinearErrorModel::operator+(
    const LinearErrorModel& other) const {
  if (other.map_.name() != map_.name() || other.map_.dim() != map_.dim() ||
      other.map_.parameter() != map_.parameter()) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot add models over different feature maps");
  }
  return LinearErrorModel(map_, weights_ + other.weights_);
}

std::vector<TrainingSample> ResidualsFromSamples(
    std::span<const KinematicSample> log, const PhysicalParams& params,
    double fd_step) {
  if (log.size() < 3) {
    throw Error(ErrorCode::kInvalidLog, "need at least 3 log samples");
  }
  constexpr double kJitter = 1e-9;
  const double dt = log[1].t - log[0].t;
  if (!(dt > 0.0) || std::abs(dt - fd_step) > kJitter) {
    throw Error(ErrorCode::kInvalidLog,
                "log spacing does not match the finite-difference step");
  }
  for (size_t k = 1; k < log.size(); ++k) {
    const double expected = log[0].t + static_cast<double>(k) * dt;
    if (std::abs(log[k].t - expected) > kJitter) {
      std::ostringstream msg;
      msg << "non-uniform timestamp at sample " << k;
      throw Error(ErrorCode::kInvalidLog, msg.str());
    }
  }

  const Vec3 g = params.GravityVector();
  std::vector<TrainingSample> out;
  out.reserve(log.size() - 2);
  for (size_t k = 1; k + 1 < log.size(); ++k) {
    const Vec3 observed =
        (log[k + 1].eta.vel - log[k - 1].eta.vel) / (2.0 * dt);
    const Vec3 predicted = log[k].u_vec + g;
    out.push_back({log[k].eta, log[k].u_vec, observed - predicted});
  }
  return out;
}

LinearErrorModel FitErrorModel(std::span<const TrainingSample> samples,
                               const FeatureMap& map, double ridge) {
  if (samples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no training samples");
  }
  if (!(ridge >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ridge must be non-negative");
  }
  const int dim = map.dim();
  const auto n = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index rows = ridge > 0.0 ? n + dim : n;

  // Ridge enters as sqrt(ridge) I rows appended to the design matrix.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, dim);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(rows, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TrainingSample& s = samples[i];
    a.row(i) = map.Value(s.eta.Stacked(), s.u_vec).transpose();
    b.row(i) = s.residual.transpose();
  }
  if (ridge > 0.0) {
    a.bottomRows(dim) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(dim, dim);
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < dim) {
    throw Error(ErrorCode::kSingularSystem,
                "training features are rank deficient");
  }
  return LinearErrorModel(map, qr.solve(b));
}

double FitObjective(std::span<const TrainingSample> samples,
                    const LinearErrorModel& model, double ridge) {
  double sum = 0.0;
  for (const TrainingSample& s : samples) {
    sum += (model.Evaluate(s.eta, s.u_vec) - s.residual).squaredNorm();
  }
  return sum + ridge * model.weights().squaredNorm();
}

void WriteErrorModel(std::ostream& os, const LinearErrorModel& model) {
  const FeatureMap& map = model.feature_map();
  os << kModelHeader << ' ' << kModelVersion << '\n'
     << std::setprecision(17) << "feature_map " << map.name() << ' '
     << map.parameter() << '\n'
     << "dim " << map.dim() << '\n';
  const Eigen::MatrixXd& w = model.weights();
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    os << w(r, 0) << ' ' << w(r, 1) << ' ' << w(r, 2) << '\n';
  }
}

LinearErrorModel ReadErrorModel(std::istream& is) {
  auto fail = [](const std::string& what) -> Error {
    return Error(ErrorCode::kParse, "error model: " + what);
  };
  std::string header;
  int version = 0;
  if (!(is >> header >> version) || header != kModelHeader) {
    throw fail("missing header");
  }
  if (version != kModelVersion) throw fail("unsupported version");

  std::string key, name;
  double parameter = 0.0;
  if (!(is >> key >> name >> parameter) || key != "feature_map") {
    throw fail("missing feature_map line");
  }
  int dim = 0;
  if (!(is >> key >> dim) || key != "dim" || dim <= 0) {
    throw fail("missing dim line");
  }
  FeatureMap map = FeatureMapByName(name, parameter);
  if (map.dim() != dim) throw fail("dim does not match feature map");

  Eigen::MatrixXd w(dim, 3);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (!(is >> w(r, c))) throw fail("truncated weight matrix");
    }
  }
  return LinearErrorModel(std::move(map), std::move(w));
}

void WriteTrainingCsv(std::ostream& os,
                      std::span<const TrainingSample> samples) {
  os << "x,y,z,vx,vy,vz,ux,uy,uz,rx,ry,rz\n" << std::setprecision(17);
  for (const TrainingSample& s : samples) {
    const Vec6 eta = s.eta.Stacked();
    for (int i = 0; i < 6; ++i) os << eta(i) << ',';
    os << s.u_vec.x() << ',' << s.u_vec.y() << ',' << s.u_vec.z() << ','
       << s.residual.x() << ',' << s.residual.y() << ',' << s.residual.z()
       << '\n';
  }
}

}  // namespace ffgen
