#include "skyspeed/commands.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "skyspeed/error.hpp"
#include "skyspeed/file_formats.hpp"
#include "skyspeed/metrics.hpp"
#include "skyspeed/pipeline.hpp"
#include "skyspeed/simulator.hpp"

namespace skyspeed {

namespace {

int report(std::ostream& log, const std::exception& e, int code) {
  log << "error: " << e.what() << "\n";
  return code;
}

std::filesystem::path text_path_for(const std::filesystem::path& json_path) {
  std::filesystem::path p = json_path;
  p.replace_extension(".txt");
  if (p == json_path) p += ".txt";
  return p;
}

}  // namespace

RoiCorners parse_corners(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("bad corner coordinate \"{}\"", item));
    }
  }
  if (values.size() != 8) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("expected 8 corner coordinates, got {}", values.size()));
  }
  RoiCorners corners;
  for (std::size_t i = 0; i < 4; ++i) corners[i] = {values[2 * i], values[2 * i + 1]};
  return corners;
}

int cmd_calibrate(const CalibrateOptions& opts, std::ostream& log) {
  try {
    const double rect_len = opts.rectified_length_px.value_or(opts.length_ft * opts.px_per_ft);
    const double rect_wid = opts.rectified_width_px.value_or(opts.width_ft * opts.px_per_ft);
    const auto [cal, h] =
        build_roi_calibration(opts.corners, opts.length_ft, opts.width_ft, rect_len, rect_wid);
    write_file(opts.out, calibration_to_json(cal, h));
    return kExitOk;
  } catch (const Error& e) {
    return report(log, e, e.code() == ErrorCode::Io ? kExitFailure : kExitConfig);
  }
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& log) {
  SceneSpec spec;
  try {
    spec = scene_from_json(read_file(opts.scenario));
    if (opts.seed_override) spec.noise.seed = *opts.seed_override;
  } catch (const Error& e) {
    return report(log, e, kExitConfig);
  }
  try {
    const SimulatedScene scene = simulate_scene(spec);
    write_file(opts.out, serialize_stream(scene.header, scene.detections));
    write_file(opts.truth_out, truth_to_json(spec.label, scene.truth));
    if (opts.calibration_out) {
      write_file(*opts.calibration_out, calibration_to_json(scene.calibration, scene.homography));
    }
    if (opts.lanes_out) {
      if (!scene.lane_map) {
        log << "error: scenario defines no lanes, cannot write a lane map\n";
        return kExitConfig;
      }
      write_file(*opts.lanes_out, lane_map_to_json(*scene.lane_map));
    }
    return kExitOk;
  } catch (const Error& e) {
    return report(log, e, e.code() == ErrorCode::Io ? kExitFailure : kExitConfig);
  }
}

int cmd_run(const RunOptions& opts, std::ostream& log) {
  std::optional<CalibrationFile> cal;
  std::optional<LaneMap> lanes;
  try {
    cal = calibration_from_json(read_file(opts.calibration));
    if (opts.lanes) lanes = lane_map_from_json(read_file(*opts.lanes));
  } catch (const Error& e) {
    return report(log, e, kExitConfig);
  }

  std::ifstream in(opts.stream, std::ios::binary);
  if (!in) {
    log << "error: cannot open " << opts.stream.string() << "\n";
    return kExitInput;
  }
  StreamReader reader(in);
  std::optional<Pipeline> pipeline;
  int code = kExitOk;
  try {
    const StreamHeader& header = reader.header();
    TrackerConfig tc = TrackerConfig::defaults_for(cal->calibration.rectified_width_px);
    if (opts.gate_radius_px) tc.gate_radius_px = *opts.gate_radius_px;
    tc.max_missed = opts.max_missed;
    tc.min_track_length = opts.min_track_length;
    try {
      pipeline.emplace(cal->calibration, cal->homography, lanes, header, tc,
                       opts.annotations.has_value());
    } catch (const Error& e) {
      return report(log, e, kExitConfig);
    }
    while (auto d = reader.next()) pipeline->push(*d);
  } catch (const Error& e) {
    code = report(log, e, kExitInput);
  }

  std::vector<SpeedRecord> records;
  if (pipeline) records = pipeline->finish();
  try {
    write_file(opts.out, records_to_jsonl(records));
    if (opts.annotations) {
      write_file(*opts.annotations,
                 pipeline ? annotations_to_jsonl(pipeline->annotations()) : std::string());
    }
  } catch (const Error& e) {
    return report(log, e, kExitFailure);
  }
  if (pipeline) {
    const auto& s = pipeline->stats();
    log << fmt::format(
        "{} records; {} detections, {} outside ROI, {} at infinity, {} short tracks rejected\n",
        records.size(), s.detections, s.outside_roi, s.at_infinity, s.rejected_tracks);
  }
  return code;
}

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& log) {
  if (opts.records.size() != opts.truth.size() || opts.records.empty()) {
    log << "error: pass one --truth per --records (at least one pair)\n";
    return kExitConfig;
  }
  if (!opts.labels.empty() && opts.labels.size() != opts.records.size()) {
    log << "error: pass one --label per --records, or none\n";
    return kExitConfig;
  }
  std::optional<BinSet> bins;
  try {
    bins = parse_bin_edges(opts.bins);
  } catch (const Error& e) {
    return report(log, e, kExitConfig);
  }
  std::vector<MetricsReport> reports;
  for (std::size_t i = 0; i < opts.records.size(); ++i) {
    std::vector<SpeedRecord> records;
    std::string label;
    std::vector<GroundTruthRecord> truth;
    try {
      records = records_from_jsonl(read_file(opts.records[i]));
      std::tie(label, truth) = truth_from_json(read_file(opts.truth[i]));
    } catch (const Error& e) {
      return report(log, e, kExitInput);
    }
    if (!opts.labels.empty()) label = opts.labels[i];
    if (label.empty()) label = opts.records[i].stem().string();
    try {
      reports.push_back(build_report(records, truth, *bins, label));
    } catch (const Error& e) {
      return report(log, e, e.code() == ErrorCode::DuplicateKey ? kExitJoin : kExitInput);
    }
  }
  try {
    write_file(opts.out, report_to_json(reports));
    write_file(opts.text_out.value_or(text_path_for(opts.out)), format_report_table(reports));
  } catch (const Error& e) {
    return report(log, e, kExitFailure);
  }
  return kExitOk;
}

}  // namespace skyspeed
