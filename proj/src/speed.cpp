#include "skyspeed/speed.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "skyspeed/error.hpp"

namespace skyspeed {

ConversionFactor conversion_factor(const RoiCalibration& cal, const StreamHeader& header) {
  return {cal.feet_per_pixel_long, cal.feet_per_pixel_lat, header.frame_rate};
}

SpeedEstimate anchored_speed(const Track& track, std::size_t current_index,
                             const ConversionFactor& cf) {
  if (current_index == 0 || current_index >= track.history.size()) {
    throw Error(ErrorCode::InsufficientHistory,
                fmt::format("track {} has {} points; index {} is not a valid current point",
                            track.id, track.history.size(), current_index));
  }
  const TrackPoint& anchor = track.history.front();
  const TrackPoint& current = track.history[current_index];
  const std::int64_t frames = current.frame_index - anchor.frame_index;
  if (frames <= 0) {
    throw Error(ErrorCode::InsufficientHistory, "history frames are not increasing");
  }
  const double dx_ft = (current.position.x - anchor.position.x) * cf.feet_per_pixel_long;
  const double dy_ft = (current.position.y - anchor.position.y) * cf.feet_per_pixel_lat;
  const double seconds = static_cast<double>(frames) / cf.frame_rate;
  return {std::hypot(dx_ft, dy_ft) / seconds * kFtpsToMph, frames, anchor.frame_index};
}

SpeedEstimate track_speed(const Track& track, const ConversionFactor& cf,
                          std::int64_t min_track_length) {
  const auto needed = static_cast<std::size_t>(std::max<std::int64_t>(min_track_length, 2));
  if (track.history.size() < needed) {
    throw Error(ErrorCode::InsufficientHistory,
                fmt::format("track {} has {} points, needs {}", track.id,
                            track.history.size(), needed));
  }
  return anchored_speed(track, track.history.size() - 1, cf);
}

double round_mph(double mph) { return std::round(mph * 100.0) / 100.0; }

}  // namespace skyspeed
