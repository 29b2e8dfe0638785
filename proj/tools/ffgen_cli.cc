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

// ffgen run   --config cfg.txt [--only SET:STRATEGY] [--feedback on|off|both]
//             [--out DIR] [--jobs N]
// ffgen table --out DIR
// ffgen traj  --kind poly|circle|figure8 [--radius R] [--rate W]
//             [--duration T] [--step H] [--out FILE]

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ffgen/experiment.h"
#include "ffgen/trajectory.h"

namespace {

using ffgen::Error;

int CmdRun(const std::string& config_path, const std::string& only,
           const std::string& feedback, const std::string& out, int jobs) {
  ffgen::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = ffgen::ParseConfigFile(config_path);
  if (!only.empty()) {
    const auto colon = only.find(':');
    if (colon == std::string::npos) {
      throw Error(ffgen::ErrorCode::kInvalidArgument,
                  "--only expects SET:STRATEGY");
    }
    cfg.dist_sets = {ffgen::ParseDisturbanceSet(only.substr(0, colon))};
    cfg.strategies = {ffgen::ParseStrategy(only.substr(colon + 1))};
  }
  if (feedback == "on") {
    cfg.feedback_modes = {true};
  } else if (feedback == "off") {
    cfg.feedback_modes = {false};
  } else if (feedback == "both") {
    cfg.feedback_modes = {false, true};
  }
  if (!out.empty()) cfg.output_dir = out;
  if (jobs > 0) cfg.jobs = jobs;

  const auto t0 = std::chrono::steady_clock::now();
  const ffgen::MatrixResult result = ffgen::RunMatrix(cfg);
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();

  ffgen::WriteArtifacts(cfg.output_dir, result);
  for (bool fb : {false, true}) {
    ffgen::PrintTable(std::cout, result, fb);
    std::cout << '\n';
  }
  std::cout << result.cells.size() << " cells in " << secs << " s; "
            << "artifacts in " << cfg.output_dir << '\n';
  return result.AllOk() ? 0 : 1;
}

int CmdTable(const std::string& out) {
  const std::filesystem::path path = std::filesystem::path(out) / "summary.csv";
  std::ifstream is(path);
  if (!is) {
    throw Error(ffgen::ErrorCode::kIo, "cannot open " + path.string());
  }
  const ffgen::MatrixResult result = ffgen::ReadSummaryCsv(is);
  for (bool fb : {false, true}) {
    ffgen::PrintTable(std::cout, result, fb);
    std::cout << '\n';
  }
  return result.AllOk() ? 0 : 1;
}

int CmdTraj(const std::string& kind, double radius, double rate,
            double duration, double step, const std::string& out) {
  std::function<ffgen::TrajectoryPoint(double)> fn;
  if (kind == "poly") {
    const ffgen::PolySegment seg = ffgen::FitRestToRestPoly(
        ffgen::Vec3::Zero(), ffgen::Vec3(1.0, 0.0, 1.0), duration);
    fn = [seg](double t) { return ffgen::EvalPolyClamped(seg, t); };
  } else if (kind == "circle" || kind == "figure8") {
    const auto k = kind == "circle" ? ffgen::PrimitiveKind::kCircle
                                    : ffgen::PrimitiveKind::kFigure8;
    fn = [=](double t) {
      return ffgen::AnalyticPrimitive(k, radius, rate, ffgen::Vec3::Zero(), t);
    };
  } else {
    throw Error(ffgen::ErrorCode::kInvalidArgument,
                "unknown trajectory kind: " + kind);
  }
  const auto samples = ffgen::SampleTrajectory(fn, 0.0, duration, step);
  const auto maxima = ffgen::MaxAbsDerivatives(samples);
  std::cerr << "max |pos| " << maxima[0] << "  |vel| " << maxima[1]
            << "  |acc| " << maxima[2] << "  |jerk| " << maxima[3]
            << "  |snap| " << maxima[4] << '\n';
  if (out.empty()) {
    ffgen::WriteTrajectoryCsv(std::cout, samples);
  } else {
    std::ofstream os(out);
    if (!os) throw Error(ffgen::ErrorCode::kIo, "cannot open " + out);
    ffgen::WriteTrajectoryCsv(os, samples);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned-model feedforward generation experiments"};
  app.require_subcommand(1);

  std::string config_path, only, feedback = "both", out;
  int jobs = 0;
  CLI::App* run = app.add_subcommand("run", "Run the experiment matrix");
  run->add_option("--config", config_path, "Experiment config file")
      ->check(CLI::ExistingFile);
  run->add_option("--only", only, "Restrict to one cell, e.g. D:FF5");
  run->add_option("--feedback", feedback, "on, off or both")
      ->check(CLI::IsMember({"on", "off", "both"}));
  run->add_option("--out", out, "Output directory");
  run->add_option("--jobs", jobs, "Worker threads (0: all cores)");

  std::string table_dir = "results";
  CLI::App* table = app.add_subcommand("table", "Re-render summary tables");
  table->add_option("--out", table_dir, "Directory holding summary.csv");

  std::string kind = "poly", traj_out;
  double radius = 1.0, rate = 2.75, duration = 1.0, step = 1e-3;
  CLI::App* traj = app.add_subcommand("traj", "Sample a reference trajectory");
  traj->add_option("--kind", kind, "poly, circle or figure8")
      ->check(CLI::IsMember({"poly", "circle", "figure8"}));
  traj->add_option("--radius", radius);
  traj->add_option("--rate", rate, "Angular rate, rad/s");
  traj->add_option("--duration", duration);
  traj->add_option("--step", step);
  traj->add_option("--out", traj_out, "CSV file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return CmdRun(config_path, only, feedback, out, jobs);
    if (*table) return CmdTable(table_dir);
    if (*traj) return CmdTraj(kind, radius, rate, duration, step, traj_out);
  } catch (const Error& e) {
    std::cerr << "ffgen: " << ffgen::ErrorCodeName(e.code()) << ": "
              << e.what() << '\n';
    return 2;
  }
  return 0;
}
