// skyspeed: calibrate, simulate, run and evaluate drone speed measurements.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "skyspeed/commands.hpp"
#include "skyspeed/error.hpp"

namespace {

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("SKYSPEED_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used, 0);
    if (raw[used] != '\0') throw std::invalid_argument(raw);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    std::cerr << "warning: ignoring unparsable SKYSPEED_SEED=\"" << raw << "\"\n";
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace skyspeed;

  CLI::App app{"Vehicle speed, lane and category measurement from drone detections"};
  app.require_subcommand(1);

  std::string corners;
  CalibrateOptions cal;
  auto* calibrate = app.add_subcommand("calibrate", "Fit the ROI homography from 4 corners");
  calibrate->add_option("--corners", corners,
                        "x1,y1,...,x4,y4 in near-left, near-right, far-right, far-left order")
      ->required();
  calibrate->add_option("--length-ft", cal.length_ft, "ROI length along travel (ft)")->required();
  calibrate->add_option("--width-ft", cal.width_ft, "ROI width across the road (ft)")->required();
  calibrate->add_option("--rect-length-px", cal.rectified_length_px, "Rectified ROI length (px)");
  calibrate->add_option("--rect-width-px", cal.rectified_width_px, "Rectified ROI width (px)");
  calibrate->add_option("--px-per-ft", cal.px_per_ft, "Rectified scale when px sizes are omitted")
      ->capture_default_str();
  calibrate->add_option("--out", cal.out, "Calibration JSON to write")->required();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Render a synthetic detection stream");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out, "Detection stream to write (JSONL)")->required();
  simulate->add_option("--truth-out", sim.truth_out, "Ground-truth JSON to write")->required();
  simulate->add_option("--calibration-out", sim.calibration_out, "Exact calibration JSON to write");
  simulate->add_option("--lanes-out", sim.lanes_out, "Lane map JSON to write");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Track detections and measure speeds");
  run_cmd->add_option("--stream", run.stream, "Detection stream (JSONL)")->required();
  run_cmd->add_option("--calibration", run.calibration, "Calibration JSON")->required();
  run_cmd->add_option("--lanes", run.lanes, "Lane map JSON");
  run_cmd->add_option("--out", run.out, "Per-vehicle records to write (JSONL)")->required();
  run_cmd->add_option("--annotations", run.annotations, "Per-detection overlay stream (JSONL)");
  run_cmd->add_option("--gate", run.gate_radius_px, "Association gate (rectified px)");
  run_cmd->add_option("--max-missed", run.max_missed, "Frames before a track closes")
      ->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_option("--min-track-length", run.min_track_length, "Shortest reported track")
      ->capture_default_str()->check(CLI::PositiveNumber);

  EvaluateOptions eval;
  auto* evaluate = app.add_subcommand("evaluate", "Compare records with ground truth");
  evaluate->add_option("--records", eval.records, "Records JSONL (repeatable)")->required();
  evaluate->add_option("--truth", eval.truth, "Ground-truth JSON (repeatable)")->required();
  evaluate->add_option("--label", eval.labels, "Section label per records file");
  evaluate->add_option("--bins", eval.bins, "Speed bin edges in mph")->capture_default_str();
  evaluate->add_option("--out", eval.out, "Report JSON to write")->required();
  evaluate->add_option("--text-out", eval.text_out, "Text table (default: --out with a .txt extension)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (calibrate->parsed()) {
    try {
      cal.corners = parse_corners(corners);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
    return cmd_calibrate(cal, std::cerr);
  }
  if (simulate->parsed()) {
    sim.seed_override = seed_from_env();
    return cmd_simulate(sim, std::cerr);
  }
  if (run_cmd->parsed()) return cmd_run(run, std::cerr);
  return cmd_evaluate(eval, std::cerr);
}
