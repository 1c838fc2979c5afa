#pragma once

#include <cstdint>

#include "skyspeed/calibration.hpp"
#include "skyspeed/detection_io.hpp"
#include "skyspeed/tracking.hpp"

namespace skyspeed {

/// ft/s to mph, exactly 3600/5280 = 15/22.
inline constexpr double kFtpsToMph = 15.0 / 22.0;

struct ConversionFactor {
  double feet_per_pixel_long = 1.0;
  double feet_per_pixel_lat = 1.0;
  double frame_rate = 1.0;
};

struct SpeedEstimate {
  double mph = 0.0;
  std::int64_t frames_spanned = 0;
  std::int64_t anchor_frame = 0;
};

ConversionFactor conversion_factor(const RoiCalibration& cal, const StreamHeader& header);

/// Speed between the track's first point and history[current_index]. Pixel
/// displacement is converted to feet per axis before taking the norm.
/// Throws InsufficientHistory when current_index is 0 or out of range.
SpeedEstimate anchored_speed(const Track& track, std::size_t current_index,
                             const ConversionFactor& cf);

/// Full-span anchored estimate, the reported speed of a vehicle. Throws
/// InsufficientHistory for tracks shorter than min_track_length (or 2).
SpeedEstimate track_speed(const Track& track, const ConversionFactor& cf,
                          std::int64_t min_track_length = 2);

/// Rounds to 0.01 mph for reporting.
double round_mph(double mph);

}  // namespace skyspeed
