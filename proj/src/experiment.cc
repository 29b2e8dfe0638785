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

#include "ffgen/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace ffgen {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class ConfigParser {
 public:
  explicit ConfigParser(ExperimentConfig& cfg) : cfg_(cfg) {}

  void Line(int line_no, const std::string& raw) {
    line_ = line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = Trim(line);
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string::npos) Fail("expected 'key = value'");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (value.empty()) Fail("empty value for '" + key + "'");
    Apply(key, value);
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    std::ostringstream msg;
    msg << "config line " << line_ << ": " << what;
    throw Error(ErrorCode::kParse, msg.str());
  }

  double Number(const std::string& v) const {
    size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(v, &used);
    } catch (const std::exception&) {
      Fail("not a number: '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(d)) {
      Fail("not a number: '" + v + "'");
    }
    return d;
  }

  double Positive(const std::string& key, const std::string& v) const {
    const double d = Number(v);
    if (!(d > 0.0)) Fail(key + " must be positive");
    return d;
  }

  double NonNegative(const std::string& key, const std::string& v) const {
    const double d = Number(v);
    if (!(d >= 0.0)) Fail(key + " must be non-negative");
    return d;
  }

  int Count(const std::string& key, const std::string& v, int min) const {
    const double d = Number(v);
    if (d != std::floor(d) || d < min || d > 1e6) {
      Fail(key + " must be an integer >= " + std::to_string(min));
    }
    return static_cast<int>(d);
  }

  Vec3 Vector(const std::string& v) const {
    const auto parts = SplitList(v);
    if (parts.size() != 3) Fail("expected three comma-separated numbers");
    return Vec3(Number(parts[0]), Number(parts[1]), Number(parts[2]));
  }

  void Apply(const std::string& key, const std::string& v) {
    SimConfig& sim = cfg_.sim;
    if (key == "dt") {
      sim.dt = Positive(key, v);
    } else if (key == "mass") {
      sim.params.mass = Positive(key, v);
    } else if (key == "gravity") {
      sim.params.gravity = Positive(key, v);
    } else if (key == "inertia") {
      sim.params.inertia = Positive(key, v);
    } else if (key == "kp_pos") {
      sim.gains.kp_pos = NonNegative(key, v);
    } else if (key == "kd_pos") {
      sim.gains.kd_pos = NonNegative(key, v);
    } else if (key == "kp_att") {
      sim.gains.kp_att = NonNegative(key, v);
    } else if (key == "kd_att") {
      sim.gains.kd_att = NonNegative(key, v);
    } else if (key == "runs_per_config") {
      cfg_.runs_per_config = Count(key, v, 1);
    } else if (key == "jobs") {
      cfg_.jobs = Count(key, v, 0);
    } else if (key == "duration") {
      cfg_.duration = Positive(key, v);
    } else if (key == "ridge") {
      cfg_.ridge = NonNegative(key, v);
    } else if (key == "start") {
      cfg_.start_pos = Vector(v);
    } else if (key == "end") {
      cfg_.end_pos = Vector(v);
    } else if (key == "output_dir") {
      cfg_.output_dir = v;
    } else if (key == "strategies") {
      cfg_.strategies.clear();
      for (const auto& s : SplitList(v)) {
        try {
          cfg_.strategies.push_back(ParseStrategy(s));
        } catch (const Error& e) {
          Fail(e.what());
        }
      }
      if (cfg_.strategies.empty()) Fail("no strategies listed");
    } else if (key == "dist_sets") {
      cfg_.dist_sets.clear();
      for (const auto& s : SplitList(v)) {
        try {
          cfg_.dist_sets.push_back(ParseDisturbanceSet(s));
        } catch (const Error& e) {
          Fail(e.what());
        }
      }
      if (cfg_.dist_sets.empty()) Fail("no disturbance sets listed");
    } else if (key == "feedback") {
      if (v == "on") {
        cfg_.feedback_modes = {true};
      } else if (v == "off") {
        cfg_.feedback_modes = {false};
      } else if (v == "both") {
        cfg_.feedback_modes = {false, true};
      } else {
        Fail("feedback must be on, off or both");
      }
    } else {
      Fail("unknown key '" + key + "'");
    }
  }

  ExperimentConfig& cfg_;
  int line_ = 0;
};

std::string CellStem(const CellResult& c) {
  std::string s(DisturbanceSetName(c.set));
  s += c.feedback ? "_fb_" : "_open_";
  s += StrategyName(c.strategy);
  return s;
}

void WriteFile(const std::filesystem::path& path, auto&& writer) {
  std::ofstream os(path);
  if (!os) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  writer(os);
}

}  // namespace

ExperimentConfig ParseConfig(std::istream& is) {
  ExperimentConfig cfg;
  ConfigParser parser(cfg);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) parser.Line(++line_no, line);
  return cfg;
}

ExperimentConfig ParseConfigFile(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw Error(ErrorCode::kParse, "cannot open config " + path.string());
  }
  return ParseConfig(is);
}

double MaxAbsPositionError(const RunLog& log) {
  if (log.rows.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty run log");
  }
  double m = 0.0;
  for (const RunLogRow& r : log.rows) {
    m = std::max(m, r.error.cwiseAbs().maxCoeff());
  }
  return m;
}

double MaxPositionErrorNorm(const RunLog& log) {
  if (log.rows.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty run log");
  }
  double m = 0.0;
  for (const RunLogRow& r : log.rows) m = std::max(m, r.error.norm());
  return m;
}

double CellResult::ReportedPerAxis() const {
  if (!ok || run_index < 1 ||
      run_index > static_cast<int>(err_per_axis.size())) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return err_per_axis[run_index - 1];
}

double CellResult::ReportedNorm() const {
  if (!ok || run_index < 1 || run_index > static_cast<int>(err_norm.size())) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return err_norm[run_index - 1];
}

CellResult RunConfig(const ExperimentConfig& cfg, Strategy strategy,
                     DisturbanceSet set, bool feedback) {
  CellResult cell;
  cell.set = set;
  cell.feedback = feedback;
  cell.strategy = strategy;
  cell.run_index = cfg.runs_per_config;

  SimConfig sim = cfg.sim;
  sim.strategy = strategy;
  sim.feedback = feedback;
  sim.disturbances = DisturbancesFor(set);

  const FeatureMap map = MakePlanarFeatureMap(sim.params.mass);
  LinearErrorModel model = LinearErrorModel::Zero(map);
  std::vector<TrainingSample> pooled;
  int run = 0;
  try {
    const PolySegment traj =
        FitRestToRestPoly(cfg.start_pos, cfg.end_pos, cfg.duration);
    for (run = 1; run <= cfg.runs_per_config; ++run) {
      // FF1 never consults the model.
      const LinearErrorModel* active =
          strategy == Strategy::kFF1 ? nullptr : &model;
      if (run == cfg.runs_per_config) {
        cell.model = model;
        cell.training = pooled;
      }
      RunLog log = RunTrajectory(sim, traj, active);
      cell.err_per_axis.push_back(MaxAbsPositionError(log));
      cell.err_norm.push_back(MaxPositionErrorNorm(log));
      if (strategy != Strategy::kFF1 && run < cfg.runs_per_config) {
        const auto samples = ResidualsFromLog(log, sim.params);
        pooled.insert(pooled.end(), samples.begin(), samples.end());
        model = FitErrorModel(pooled, map, cfg.ridge);
      }
      cell.logs.push_back(std::move(log));
    }
    cell.ok = true;
  } catch (const Error& e) {
    std::ostringstream msg;
    msg << ErrorCodeName(e.code()) << " in run " << run << ": " << e.what();
    cell.diagnostic = msg.str();
  }
  return cell;
}

const CellResult* MatrixResult::Find(DisturbanceSet set, bool feedback,
                                     Strategy strategy) const {
  for (const CellResult& c : cells) {
    if (c.set == set && c.feedback == feedback && c.strategy == strategy) {
      return &c;
    }
  }
  return nullptr;
}

bool MatrixResult::AllOk() const {
  return std::all_of(cells.begin(), cells.end(),
                     [](const CellResult& c) { return c.ok; });
}

MatrixResult RunMatrix(const ExperimentConfig& cfg) {
  struct Job {
    Strategy strategy;
    DisturbanceSet set;
    bool feedback;
  };
  std::vector<Job> jobs;
  for (bool fb : cfg.feedback_modes) {
    for (DisturbanceSet set : cfg.dist_sets) {
      for (Strategy s : cfg.strategies) jobs.push_back({s, set, fb});
    }
  }

  MatrixResult result;
  result.cells.resize(jobs.size());
  unsigned workers = cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs)
                                  : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1,
                                 static_cast<unsigned>(jobs.size()));

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      result.cells[i] =
          RunConfig(cfg, jobs[i].strategy, jobs[i].set, jobs[i].feedback);
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  return result;
}

void PrintTable(std::ostream& os, const MatrixResult& result, bool feedback) {
  std::vector<Strategy> strategies;
  std::vector<DisturbanceSet> sets;
  for (const CellResult& c : result.cells) {
    if (c.feedback != feedback) continue;
    if (std::find(strategies.begin(), strategies.end(), c.strategy) ==
        strategies.end()) {
      strategies.push_back(c.strategy);
    }
    if (std::find(sets.begin(), sets.end(), c.set) == sets.end()) {
      sets.push_back(c.set);
    }
  }
  if (sets.empty()) return;

  os << (feedback ? "Max position error (m), with feedback\n"
                  : "Max position error (m), without feedback\n");
  os << "Set ";
  for (Strategy s : strategies) os << std::setw(9) << StrategyName(s);
  os << '\n';
  for (DisturbanceSet set : sets) {
    os << std::setw(3) << DisturbanceSetName(set) << ' ';
    for (Strategy s : strategies) {
      const CellResult* c = result.Find(set, feedback, s);
      if (c == nullptr) {
        os << std::setw(9) << "-";
      } else if (!c->ok) {
        os << std::setw(9) << "fail";
      } else {
        os << std::setw(9) << std::fixed << std::setprecision(3)
           << c->ReportedNorm() << std::defaultfloat;
      }
    }
    os << '\n';
  }
  for (const CellResult& c : result.cells) {
    if (c.feedback == feedback && !c.ok) {
      os << "  " << CellStem(c) << ": " << c.diagnostic << '\n';
    }
  }
}

void WriteSummaryCsv(std::ostream& os, const MatrixResult& result) {
  os << "set,feedback,strategy,max_abs_err_peraxis,max_abs_err_norm,"
        "run_index\n"
     << std::setprecision(17);
  for (const CellResult& c : result.cells) {
    os << DisturbanceSetName(c.set) << ',' << (c.feedback ? "on" : "off")
       << ',' << StrategyName(c.strategy) << ',';
    if (c.ok) {
      os << c.ReportedPerAxis() << ',' << c.ReportedNorm();
    } else {
      os << "nan,nan";
    }
    os << ',' << c.run_index << '\n';
  }
}

MatrixResult ReadSummaryCsv(std::istream& is) {
  MatrixResult result;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kParse, "summary line " + std::to_string(line_no) +
                                       ": " + what);
  };
  if (!std::getline(is, line)) fail("missing header");
  ++line_no;
  while (std::getline(is, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto f = SplitList(line);
    if (f.size() != 6) fail("expected 6 fields");
    CellResult c;
    try {
      c.set = ParseDisturbanceSet(f[0]);
      c.strategy = ParseStrategy(f[2]);
      c.run_index = std::stoi(f[5]);
    } catch (const std::exception& e) {
      fail(e.what());
    }
    c.feedback = f[1] == "on";
    if (f[3] != "nan") {
      c.ok = true;
      c.err_per_axis.assign(c.run_index, std::stod(f[3]));
      c.err_norm.assign(c.run_index, std::stod(f[4]));
    } else {
      c.diagnostic = "failed in original run";
    }
    result.cells.push_back(std::move(c));
  }
  return result;
}

void WriteArtifacts(const std::filesystem::path& dir,
                    const MatrixResult& result) {
  namespace fs = std::filesystem;
  for (const char* sub : {"logs", "models", "errors", "training"}) {
    fs::create_directories(dir / sub);
  }
  WriteFile(dir / "summary.csv",
            [&](std::ostream& os) { WriteSummaryCsv(os, result); });

  // Per (set, feedback): reported-run error traces side by side.
  std::map<std::string, std::vector<const CellResult*>> groups;
  for (const CellResult& c : result.cells) {
    const std::string stem = CellStem(c);
    for (size_t r = 0; r < c.logs.size(); ++r) {
      WriteFile(dir / "logs" / (stem + "_run" + std::to_string(r + 1) + ".csv"),
                [&](std::ostream& os) { WriteRunLogCsv(os, c.logs[r]); });
    }
    if (c.model) {
      WriteFile(dir / "models" / (stem + ".model"),
                [&](std::ostream& os) { WriteErrorModel(os, *c.model); });
    }
    if (!c.training.empty()) {
      WriteFile(dir / "training" / (stem + ".csv"),
                [&](std::ostream& os) { WriteTrainingCsv(os, c.training); });
    }
    if (c.ok && !c.logs.empty()) {
      groups[std::string(DisturbanceSetName(c.set)) +
             (c.feedback ? "_fb" : "_open")]
          .push_back(&c);
    }
  }
  for (const auto& [name, cells] : groups) {
    WriteFile(dir / "errors" / (name + ".csv"), [&](std::ostream& os) {
      os << "t";
      for (const CellResult* c : cells) {
        const auto s = StrategyName(c->strategy);
        os << ',' << s << "_ex," << s << "_ez";
      }
      os << '\n' << std::setprecision(17);
      const RunLog& first = cells.front()->logs.back();
      for (size_t k = 0; k < first.rows.size(); ++k) {
        os << first.rows[k].t;
        for (const CellResult* c : cells) {
          const RunLog& log = c->logs.back();
          const Eigen::Vector2d e =
              k < log.rows.size() ? log.rows[k].error : Eigen::Vector2d::Zero();
          os << ',' << e.x() << ',' << e.y();
        }
        os << '\n';
      }
    });
  }
}

}  // namespace ffgen
