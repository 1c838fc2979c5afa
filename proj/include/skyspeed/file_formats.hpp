#pragma once

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skyspeed/calibration.hpp"
#include "skyspeed/lanes.hpp"
#include "skyspeed/metrics.hpp"
#include "skyspeed/pipeline.hpp"
#include "skyspeed/simulator.hpp"

namespace skyspeed {

// Config documents (calibration, lane map, scenario) throw InvalidConfig or
// InvalidSpec; data documents (records, truth) throw MalformedRecord.

struct CalibrationFile {
  RoiCalibration calibration;
  Homography homography;
};

std::string calibration_to_json(const RoiCalibration& cal, const Homography& h);
CalibrationFile calibration_from_json(const std::string& text);

std::string lane_map_to_json(const LaneMap& map);
LaneMap lane_map_from_json(const std::string& text);

std::string scene_to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const std::string& text);

std::string truth_to_json(const std::string& label, std::span<const GroundTruthRecord> truth);
std::pair<std::string, std::vector<GroundTruthRecord>> truth_from_json(const std::string& text);

/// One JSON object per line.
std::string record_to_json_line(const SpeedRecord& r);
std::string records_to_jsonl(std::span<const SpeedRecord> records);
std::vector<SpeedRecord> records_from_jsonl(const std::string& text);

std::string annotations_to_jsonl(std::span<const Annotation> annotations);

std::string report_to_json(std::span<const MetricsReport> reports);

/// Whole-file helpers; throw Io.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace skyspeed
