#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "skyspeed/calibration.hpp"
#include "skyspeed/tracking.hpp"

namespace skyspeed {

using LaneId = int;

enum class Direction { Up, Down };
enum class DirectionResult { Up, Down, Unresolved };

std::string_view direction_name(Direction d);
std::optional<Direction> parse_direction(std::string_view name);

struct LanePolygon {
  LaneId lane_id = 0;
  std::vector<RectifiedPoint> vertices;
  std::optional<Direction> direction;
};

enum class LaneMode { MultiLane, BidirectionalSingle };

std::string_view lane_mode_name(LaneMode m);
std::optional<LaneMode> parse_lane_mode(std::string_view name);

enum class Containment { Outside, Boundary, Inside };

/// Even-odd containment with an exact on-edge test.
Containment classify_point(std::span<const RectifiedPoint> polygon, const RectifiedPoint& p);

/// True when no two edges meet except consecutive edges at their shared vertex.
bool is_simple_polygon(std::span<const RectifiedPoint> polygon);

/// True when the interiors of the two simple polygons intersect.
bool interiors_overlap(std::span<const RectifiedPoint> a, std::span<const RectifiedPoint> b);

/// Validated, immutable set of lane polygons, kept sorted by lane id.
class LaneMap {
 public:
  /// Throws InvalidLaneMap when a polygon is not simple, polygons overlap,
  /// ids repeat, or the lane count does not fit the mode.
  static LaneMap create(LaneMode mode, std::vector<LanePolygon> lanes);

  LaneMode mode() const noexcept { return mode_; }
  const std::vector<LanePolygon>& lanes() const noexcept { return lanes_; }
  const LanePolygon* find(LaneId id) const;

 private:
  LaneMap(LaneMode mode, std::vector<LanePolygon> lanes)
      : mode_(mode), lanes_(std::move(lanes)) {}

  LaneMode mode_;
  std::vector<LanePolygon> lanes_;
};

/// Lane containing p; boundary points go to the lowest touching lane id.
std::optional<LaneId> assign_lane(const RectifiedPoint& p, const LaneMap& map);

/// Majority vote over the track's points. Ties go to the lane seen most
/// recently; nullopt when a strict majority of points lies outside all lanes.
std::optional<LaneId> track_lane(const Track& track, const LaneMap& map);

inline constexpr double kMinDirectionDisplacementPx = 1.0;

/// Sign of the net longitudinal displacement: positive is Down, negative Up.
/// Throws WrongMode unless the map is BidirectionalSingle.
DirectionResult infer_direction(const Track& track, const LaneMap& map);

}  // namespace skyspeed
