#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "skyspeed/calibration.hpp"

namespace skyspeed {

/// Process exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitInput = 3,
  kExitJoin = 4,
};

struct CalibrateOptions {
  RoiCorners corners;
  double length_ft = 0.0;
  double width_ft = 0.0;
  std::optional<double> rectified_length_px;
  std::optional<double> rectified_width_px;
  double px_per_ft = 5.0;
  std::filesystem::path out;
};

struct SimulateOptions {
  std::filesystem::path scenario;
  std::filesystem::path out;
  std::filesystem::path truth_out;
  std::optional<std::filesystem::path> calibration_out;
  std::optional<std::filesystem::path> lanes_out;
  std::optional<std::uint64_t> seed_override;
};

struct RunOptions {
  std::filesystem::path stream;
  std::filesystem::path calibration;
  std::optional<std::filesystem::path> lanes;
  std::filesystem::path out;
  std::optional<std::filesystem::path> annotations;
  std::optional<double> gate_radius_px;
  std::int64_t max_missed = 5;
  std::int64_t min_track_length = 5;
};

struct EvaluateOptions {
  std::vector<std::filesystem::path> records;
  std::vector<std::filesystem::path> truth;
  std::vector<std::string> labels;
  std::string bins = "15,25,35,45,55";
  std::filesystem::path out;
  std::optional<std::filesystem::path> text_out;
};

/// Parses "x1,y1,x2,y2,x3,y3,x4,y4" in near-left, near-right, far-right,
/// far-left order. Throws InvalidArgument.
RoiCorners parse_corners(const std::string& text);

int cmd_calibrate(const CalibrateOptions& opts, std::ostream& log);
int cmd_simulate(const SimulateOptions& opts, std::ostream& log);
int cmd_run(const RunOptions& opts, std::ostream& log);
int cmd_evaluate(const EvaluateOptions& opts, std::ostream& log);

}  // namespace skyspeed
