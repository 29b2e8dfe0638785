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

// Strategy x disturbance-set x feedback experiment matrix for the planar
// vehicle, with iterative model learning per cell.

#ifndef FFGEN_EXPERIMENT_H_
#define FFGEN_EXPERIMENT_H_

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ffgen/error_model.h"
#include "ffgen/flatness.h"
#include "ffgen/planar_sim.h"
#include "ffgen/trajectory.h"

namespace ffgen {

struct ExperimentConfig {
  std::vector<Strategy> strategies = {Strategy::kFF1, Strategy::kFF2,
                                      Strategy::kFF3, Strategy::kFF4,
                                      Strategy::kFF5};
  std::vector<DisturbanceSet> dist_sets = {
      DisturbanceSet::kA, DisturbanceSet::kB, DisturbanceSet::kC,
      DisturbanceSet::kD};
  std::vector<bool> feedback_modes = {false, true};
  int runs_per_config = 3;
  // Strategy, disturbances and feedback are overwritten per cell.
  SimConfig sim;
  Vec3 start_pos = Vec3::Zero();
  Vec3 end_pos = Vec3(1.0, 0.0, 1.0);
  double duration = 1.0;
  double ridge = kDefaultRidge;
  std::string output_dir = "results";
  int jobs = 0;  // 0: hardware concurrency
};

// Line-oriented "key = value" file; '#' starts a comment. Keys:
//   dt mass gravity inertia kp_pos kd_pos kp_att kd_att runs_per_config
//   strategies (FF1,FF3,...)  dist_sets (A,B,...)  feedback (on|off|both)
//   start end (x,y,z)  duration  ridge  output_dir  jobs
// Missing keys keep their defaults. Throws kParse with the line number.
ExperimentConfig ParseConfig(std::istream& is);
ExperimentConfig ParseConfigFile(const std::filesystem::path& path);

// max_k max(|e_x|, |e_z|)
double MaxAbsPositionError(const RunLog& log);
// max_k |e|
double MaxPositionErrorNorm(const RunLog& log);

struct CellResult {
  DisturbanceSet set = DisturbanceSet::kA;
  bool feedback = false;
  Strategy strategy = Strategy::kFF1;
  bool ok = false;
  std::string diagnostic;
  // One entry per completed run.
  std::vector<double> err_per_axis;
  std::vector<double> err_norm;
  int run_index = 0;  // 1-based run the summary reports
  std::vector<RunLog> logs;
  // Model used during the reported run and the samples it was fit on.
  std::optional<LinearErrorModel> model;
  std::vector<TrainingSample> training;

  double ReportedPerAxis() const;
  double ReportedNorm() const;
};

// Run 1 flies with a zero-weight model; after every run the residuals of all
// runs so far are pooled and the model refit. Failures are captured in the
// result rather than thrown.
CellResult RunConfig(const ExperimentConfig& cfg, Strategy strategy,
                     DisturbanceSet set, bool feedback);

struct MatrixResult {
  std::vector<CellResult> cells;

  const CellResult* Find(DisturbanceSet set, bool feedback,
                         Strategy strategy) const;
  bool AllOk() const;
};

// Cells run in parallel; the returned order follows the config order
// (feedback, set, strategy) regardless of scheduling.
MatrixResult RunMatrix(const ExperimentConfig& cfg);

// Row per disturbance set, column per strategy, for one feedback mode.
// Entries are the reported error norm in meters, or "fail".
void PrintTable(std::ostream& os, const MatrixResult& result, bool feedback);

// summary.csv, logs/, models/, errors/ and training/ under dir.
void WriteArtifacts(const std::filesystem::path& dir,
                    const MatrixResult& result);

// Columns set,feedback,strategy,max_abs_err_peraxis,max_abs_err_norm,
// run_index.
void WriteSummaryCsv(std::ostream& os, const MatrixResult& result);
MatrixResult ReadSummaryCsv(std::istream& is);

}  // namespace ffgen

#endif  // FFGEN_EXPERIMENT_H_
