#include "skyspeed/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <fmt/format.h>

#include "skyspeed/error.hpp"

namespace skyspeed {

TrackerConfig TrackerConfig::defaults_for(double rectified_width_px) {
  TrackerConfig c;
  c.gate_radius_px = 0.25 * rectified_width_px;
  return c;
}

Tracker::Tracker(TrackerConfig config) : config_(config) {
  if (!(config_.gate_radius_px > 0.0) || config_.max_missed <= 0 ||
      config_.min_track_length <= 0) {
    throw Error(ErrorCode::InvalidArgument,
                "tracker gate, max_missed and min_track_length must be > 0");
  }
}

const Track* Tracker::find(TrackId id) const {
  for (const auto& t : tracks_) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

void Tracker::finalize(Track& t) { t.state = TrackState::Finalized; }

std::vector<TrackId> Tracker::step(std::int64_t frame_index,
                                   std::span<const RectifiedDetection> detections) {
  if (last_frame_ && frame_index <= *last_frame_) {
    throw Error(ErrorCode::NonMonotonicFrames,
                fmt::format("frame {} stepped after frame {}", frame_index, *last_frame_));
  }
  last_frame_ = frame_index;

  // Tracks that already sat out max_missed skipped frames expire first.
  for (auto& t : tracks_) {
    if (t.state != TrackState::Active) continue;
    if (frame_index - t.last().frame_index - 1 >= config_.max_missed) {
      t.missed_frames = frame_index - t.last().frame_index - 1;
      finalize(t);
    }
  }

  struct Candidate {
    double distance;
    TrackId track;
    std::size_t track_slot;
    std::size_t detection;
  };
  std::vector<Candidate> candidates;
  for (std::size_t s = 0; s < tracks_.size(); ++s) {
    const Track& t = tracks_[s];
    if (t.state != TrackState::Active) continue;
    for (std::size_t d = 0; d < detections.size(); ++d) {
      if (detections[d].category != t.category) continue;
      const double dist = std::hypot(detections[d].position.x - t.last().position.x,
                                     detections[d].position.y - t.last().position.y);
      if (dist <= config_.gate_radius_px) candidates.push_back({dist, t.id, s, d});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.distance, a.track, a.detection) < std::tie(b.distance, b.track, b.detection);
  });

  std::vector<TrackId> assigned(detections.size(), 0);
  std::vector<bool> track_used(tracks_.size(), false);
  for (const auto& c : candidates) {
    if (track_used[c.track_slot] || assigned[c.detection] != 0) continue;
    track_used[c.track_slot] = true;
    assigned[c.detection] = c.track;
    Track& t = tracks_[c.track_slot];
    t.history.push_back({frame_index, detections[c.detection].position});
    t.missed_frames = 0;
    ++(t.category == Category::Car ? t.car_votes : t.heavy_votes);
  }

  for (std::size_t s = 0; s < tracks_.size(); ++s) {
    Track& t = tracks_[s];
    if (t.state != TrackState::Active || track_used[s]) continue;
    t.missed_frames = frame_index - t.last().frame_index;
    if (t.missed_frames >= config_.max_missed) finalize(t);
  }

  for (std::size_t d = 0; d < detections.size(); ++d) {
    if (assigned[d] != 0) continue;
    Track t;
    t.id = next_id_++;
    t.category = detections[d].category;
    t.history.push_back({frame_index, detections[d].position});
    ++(t.category == Category::Car ? t.car_votes : t.heavy_votes);
    assigned[d] = t.id;
    tracks_.push_back(std::move(t));
  }
  return assigned;
}

FinalizeResult Tracker::finalize_all() {
  for (auto& t : tracks_) finalize(t);
  return drain_finalized();
}

FinalizeResult Tracker::drain_finalized() {
  FinalizeResult out;
  std::vector<Track> remaining;
  for (auto& t : tracks_) {
    if (t.state == TrackState::Active) {
      remaining.push_back(std::move(t));
    } else if (static_cast<std::int64_t>(t.history.size()) < config_.min_track_length) {
      ++out.rejects;
    } else {
      out.tracks.push_back(std::move(t));
    }
  }
  tracks_ = std::move(remaining);
  std::sort(out.tracks.begin(), out.tracks.end(),
            [](const Track& a, const Track& b) { return a.id < b.id; });
  return out;
}

}  // namespace skyspeed
