#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "skyspeed/calibration.hpp"
#include "skyspeed/detection_io.hpp"
#include "skyspeed/lanes.hpp"
#include "skyspeed/metrics.hpp"
#include "skyspeed/speed.hpp"
#include "skyspeed/tracking.hpp"

namespace skyspeed {

/// Per-detection overlay data for external renderers.
struct Annotation {
  std::int64_t frame_index = 0;
  TrackId track_id = 0;
  Category category = Category::Car;
  ImagePoint image;
  RectifiedPoint rectified;
  std::optional<double> running_speed_mph;
};

struct RunStats {
  std::size_t detections = 0;
  std::size_t outside_roi = 0;
  std::size_t at_infinity = 0;
  std::size_t rejected_tracks = 0;
};

/// Streaming detections -> speed records. Detections must arrive in
/// non-decreasing frame order; each frame is tracked once the next frame
/// begins or finish() is called.
class Pipeline {
 public:
  Pipeline(RoiCalibration calibration, Homography homography, std::optional<LaneMap> lanes,
           const StreamHeader& header, TrackerConfig tracker_config,
           bool keep_annotations = false);

  void push(const Detection& detection);

  /// Records finalized so far, ordered by track id within each drain.
  const std::vector<SpeedRecord>& records() const noexcept { return records_; }
  const std::vector<Annotation>& annotations() const noexcept { return annotations_; }
  const RunStats& stats() const noexcept { return stats_; }

  /// Flushes the pending frame, finalizes every track and returns all
  /// records sorted by track id.
  std::vector<SpeedRecord> finish();

 private:
  void flush_frame();
  void collect(FinalizeResult finalized);
  SpeedRecord make_record(const Track& track) const;

  RoiCalibration calibration_;
  Homography homography_;
  std::optional<LaneMap> lanes_;
  ConversionFactor cf_;
  Tracker tracker_;
  bool keep_annotations_;

  std::optional<std::int64_t> pending_frame_;
  std::vector<RectifiedDetection> pending_;
  std::vector<ImagePoint> pending_image_;

  std::vector<SpeedRecord> records_;
  std::vector<Annotation> annotations_;
  RunStats stats_;
};

struct RunResult {
  std::vector<SpeedRecord> records;
  std::vector<Annotation> annotations;
  RunStats stats;
};

RunResult run_pipeline(const DetectionStream& stream, const RoiCalibration& calibration,
                       const Homography& homography, const std::optional<LaneMap>& lanes,
                       const TrackerConfig& tracker_config, bool keep_annotations = false);

}  // namespace skyspeed
