#include "skyspeed/pipeline.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "skyspeed/error.hpp"

namespace skyspeed {

Pipeline::Pipeline(RoiCalibration calibration, Homography homography,
                   std::optional<LaneMap> lanes, const StreamHeader& header,
                   TrackerConfig tracker_config, bool keep_annotations)
    : calibration_(std::move(calibration)),
      homography_(homography),
      lanes_(std::move(lanes)),
      cf_(conversion_factor(calibration_, header)),
      tracker_(tracker_config),
      keep_annotations_(keep_annotations) {}

void Pipeline::push(const Detection& d) {
  if (pending_frame_ && d.frame_index < *pending_frame_) {
    throw Error(ErrorCode::NonMonotonicFrames,
                fmt::format("frame {} follows frame {}", d.frame_index, *pending_frame_));
  }
  if (pending_frame_ && d.frame_index != *pending_frame_) flush_frame();
  pending_frame_ = d.frame_index;
  ++stats_.detections;

  const ImagePoint c = centroid(d);
  RectifiedPoint r;
  try {
    r = apply_homography(homography_, c);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PointAtInfinity) throw;
    ++stats_.at_infinity;
    return;
  }
  if (!calibration_.contains(r)) {
    ++stats_.outside_roi;
    return;
  }
  pending_.push_back({r, d.category});
  pending_image_.push_back(c);
}

void Pipeline::flush_frame() {
  if (!pending_frame_) return;
  const std::int64_t frame = *pending_frame_;
  const auto ids = tracker_.step(frame, pending_);
  if (keep_annotations_) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const Track* t = tracker_.find(ids[i]);
      Annotation a;
      a.frame_index = frame;
      a.track_id = ids[i];
      a.category = pending_[i].category;
      a.image = pending_image_[i];
      a.rectified = pending_[i].position;
      if (t != nullptr && t->history.size() >= 2) {
        a.running_speed_mph = round_mph(anchored_speed(*t, t->history.size() - 1, cf_).mph);
      }
      annotations_.push_back(a);
    }
  }
  collect(tracker_.drain_finalized());
  pending_.clear();
  pending_image_.clear();
}

void Pipeline::collect(FinalizeResult finalized) {
  stats_.rejected_tracks += finalized.rejects;
  for (const auto& t : finalized.tracks) records_.push_back(make_record(t));
}

SpeedRecord Pipeline::make_record(const Track& t) const {
  SpeedRecord r;
  r.track_id = t.id;
  r.category = t.category;
  r.frames = static_cast<std::int64_t>(t.history.size());
  r.first_frame = t.first().frame_index;
  r.last_frame = t.last().frame_index;
  r.speed_mph = round_mph(track_speed(t, cf_, tracker_.config().min_track_length).mph);
  if (lanes_) {
    if (lanes_->mode() == LaneMode::BidirectionalSingle) {
      switch (infer_direction(t, *lanes_)) {
        case DirectionResult::Up: r.direction = Direction::Up; break;
        case DirectionResult::Down: r.direction = Direction::Down; break;
        case DirectionResult::Unresolved: break;
      }
    } else {
      r.lane = track_lane(t, *lanes_);
      if (r.lane) r.direction = lanes_->find(*r.lane)->direction;
    }
  }
  return r;
}

std::vector<SpeedRecord> Pipeline::finish() {
  flush_frame();
  pending_frame_.reset();
  collect(tracker_.finalize_all());
  std::sort(records_.begin(), records_.end(),
            [](const SpeedRecord& a, const SpeedRecord& b) { return a.track_id < b.track_id; });
  return records_;
}

RunResult run_pipeline(const DetectionStream& stream, const RoiCalibration& calibration,
                       const Homography& homography, const std::optional<LaneMap>& lanes,
                       const TrackerConfig& tracker_config, bool keep_annotations) {
  Pipeline p(calibration, homography, lanes, stream.header, tracker_config, keep_annotations);
  for (const auto& d : stream.detections) p.push(d);
  RunResult out;
  out.records = p.finish();
  out.annotations = p.annotations();
  out.stats = p.stats();
  return out;
}

}  // namespace skyspeed
