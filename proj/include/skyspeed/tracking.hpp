#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "skyspeed/calibration.hpp"
#include "skyspeed/detection_io.hpp"

namespace skyspeed {

using TrackId = std::int64_t;

struct TrackPoint {
  std::int64_t frame_index = 0;
  RectifiedPoint position;
};

enum class TrackState { Active, Finalized };

struct Track {
  TrackId id = 0;
  Category category = Category::Car;
  std::vector<TrackPoint> history;
  std::int64_t missed_frames = 0;
  TrackState state = TrackState::Active;
  std::int64_t car_votes = 0;
  std::int64_t heavy_votes = 0;

  const TrackPoint& first() const { return history.front(); }
  const TrackPoint& last() const { return history.back(); }
};

struct TrackerConfig {
  double gate_radius_px = 0.0;
  std::int64_t max_missed = 5;
  std::int64_t min_track_length = 5;

  /// Gate at a quarter of the rectified ROI width.
  static TrackerConfig defaults_for(double rectified_width_px);
};

/// A detection already mapped into rectified coordinates.
struct RectifiedDetection {
  RectifiedPoint position;
  Category category = Category::Car;
};

struct FinalizeResult {
  std::vector<Track> tracks;
  std::size_t rejects = 0;
};

/// Greedy gated nearest-neighbour tracker. Pairs are accepted in ascending
/// order of (distance, track id, detection index); only same-category pairs
/// within the gate are considered. A track is finalized once it has gone
/// max_missed frames without a match. Frames may be skipped: the gap counts
/// as missed frames.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config);

  /// Returns the track id assigned to each detection, in input order.
  /// Throws NonMonotonicFrames unless frame_index exceeds every earlier one.
  std::vector<TrackId> step(std::int64_t frame_index,
                            std::span<const RectifiedDetection> detections);

  /// Finalizes every active track and returns those with at least
  /// min_track_length points, ordered by id. The tracker is left empty.
  FinalizeResult finalize_all();

  /// Removes and returns tracks that are already Finalized, filtered the same
  /// way as finalize_all.
  FinalizeResult drain_finalized();

  const std::vector<Track>& tracks() const noexcept { return tracks_; }
  const Track* find(TrackId id) const;
  const TrackerConfig& config() const noexcept { return config_; }
  std::optional<std::int64_t> last_frame() const noexcept { return last_frame_; }

 private:
  void finalize(Track& t);

  TrackerConfig config_;
  std::vector<Track> tracks_;
  TrackId next_id_ = 1;
  std::optional<std::int64_t> last_frame_;
};

}  // namespace skyspeed
