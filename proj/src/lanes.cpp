#include "skyspeed/lanes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "skyspeed/error.hpp"

namespace skyspeed {

namespace {

double orient(const RectifiedPoint& a, const RectifiedPoint& b, const RectifiedPoint& p) {
  return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

int sign(double v) { return (v > 0) - (v < 0); }

bool within_box(const RectifiedPoint& a, const RectifiedPoint& b, const RectifiedPoint& p) {
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

bool on_segment(const RectifiedPoint& a, const RectifiedPoint& b, const RectifiedPoint& p) {
  return orient(a, b, p) == 0.0 && within_box(a, b, p);
}

bool segments_intersect(const RectifiedPoint& a, const RectifiedPoint& b,
                        const RectifiedPoint& c, const RectifiedPoint& d) {
  const int o1 = sign(orient(a, b, c));
  const int o2 = sign(orient(a, b, d));
  const int o3 = sign(orient(c, d, a));
  const int o4 = sign(orient(c, d, b));
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && within_box(a, b, c)) return true;
  if (o2 == 0 && within_box(a, b, d)) return true;
  if (o3 == 0 && within_box(c, d, a)) return true;
  if (o4 == 0 && within_box(c, d, b)) return true;
  return false;
}

// Crossing at a single interior point of both segments.
bool segments_cross_properly(const RectifiedPoint& a, const RectifiedPoint& b,
                             const RectifiedPoint& c, const RectifiedPoint& d) {
  const int o1 = sign(orient(a, b, c));
  const int o2 = sign(orient(a, b, d));
  const int o3 = sign(orient(c, d, a));
  const int o4 = sign(orient(c, d, b));
  return o1 * o2 < 0 && o3 * o4 < 0;
}

double signed_area(std::span<const RectifiedPoint> poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return a / 2.0;
}

struct Box {
  double x0, y0, x1, y1;
};

Box bounds(std::span<const RectifiedPoint> poly) {
  Box b{poly[0].x, poly[0].y, poly[0].x, poly[0].y};
  for (const auto& p : poly) {
    b.x0 = std::min(b.x0, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.x1 = std::max(b.x1, p.x);
    b.y1 = std::max(b.y1, p.y);
  }
  return b;
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidLaneMap, what); }

}  // namespace

std::string_view direction_name(Direction d) { return d == Direction::Up ? "up" : "down"; }

std::optional<Direction> parse_direction(std::string_view name) {
  if (name == "up") return Direction::Up;
  if (name == "down") return Direction::Down;
  return std::nullopt;
}

std::string_view lane_mode_name(LaneMode m) {
  return m == LaneMode::MultiLane ? "multi_lane" : "bidirectional_single";
}

std::optional<LaneMode> parse_lane_mode(std::string_view name) {
  if (name == "multi_lane") return LaneMode::MultiLane;
  if (name == "bidirectional_single") return LaneMode::BidirectionalSingle;
  return std::nullopt;
}

Containment classify_point(std::span<const RectifiedPoint> polygon, const RectifiedPoint& p) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const RectifiedPoint& a = polygon[j];
    const RectifiedPoint& b = polygon[i];
    if (on_segment(a, b, p)) return Containment::Boundary;
    if ((a.y > p.y) != (b.y > p.y)) {
      // The edge straddles the horizontal through p; it crosses to the right
      // of p when p lies on the left of the upward-oriented edge.
      const double o = orient(a, b, p);
      if (b.y > a.y ? o > 0 : o < 0) inside = !inside;
    }
  }
  return inside ? Containment::Inside : Containment::Outside;
}

bool is_simple_polygon(std::span<const RectifiedPoint> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (const auto& p : poly) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  }
  if (signed_area(poly) == 0.0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& c = poly[j];
      const auto& d = poly[(j + 1) % n];
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (!adjacent) {
        if (segments_intersect(a, b, c, d)) return false;
        continue;
      }
      // Consecutive edges may only share their common vertex.
      const RectifiedPoint& shared = (j == i + 1) ? b : a;
      const RectifiedPoint& far_this = (j == i + 1) ? a : b;
      const RectifiedPoint& far_other = (j == i + 1) ? d : c;
      if (orient(shared, far_this, far_other) == 0.0) {
        const double dot = (far_this.x - shared.x) * (far_other.x - shared.x) +
                           (far_this.y - shared.y) * (far_other.y - shared.y);
        if (dot > 0.0) return false;
      }
    }
  }
  return true;
}

bool interiors_overlap(std::span<const RectifiedPoint> a, std::span<const RectifiedPoint> b) {
  const Box ba = bounds(a);
  const Box bb = bounds(b);
  const Box ov{std::max(ba.x0, bb.x0), std::max(ba.y0, bb.y0), std::min(ba.x1, bb.x1),
               std::min(ba.y1, bb.y1)};
  if (!(ov.x0 < ov.x1 && ov.y0 < ov.y1)) return false;

  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_cross_properly(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) {
        return true;
      }
    }
  }
  const auto strictly_inside_other = [](std::span<const RectifiedPoint> from,
                                        std::span<const RectifiedPoint> other) {
    for (std::size_t i = 0; i < from.size(); ++i) {
      const auto& p = from[i];
      const auto& q = from[(i + 1) % from.size()];
      const RectifiedPoint mid{(p.x + q.x) / 2.0, (p.y + q.y) / 2.0};
      if (classify_point(other, p) == Containment::Inside ||
          classify_point(other, mid) == Containment::Inside) {
        return true;
      }
    }
    return false;
  };
  if (strictly_inside_other(a, b) || strictly_inside_other(b, a)) return true;

  // Sampled interior check over the shared bounding box.
  constexpr int kGrid = 48;
  for (int iy = 0; iy < kGrid; ++iy) {
    for (int ix = 0; ix < kGrid; ++ix) {
      const RectifiedPoint p{ov.x0 + (ov.x1 - ov.x0) * (ix + 0.5) / kGrid,
                             ov.y0 + (ov.y1 - ov.y0) * (iy + 0.5) / kGrid};
      if (classify_point(a, p) == Containment::Inside &&
          classify_point(b, p) == Containment::Inside) {
        return true;
      }
    }
  }
  return false;
}

LaneMap LaneMap::create(LaneMode mode, std::vector<LanePolygon> lanes) {
  if (mode == LaneMode::MultiLane && lanes.size() < 2) {
    invalid(fmt::format("multi_lane mode needs at least 2 lanes, got {}", lanes.size()));
  }
  if (mode == LaneMode::BidirectionalSingle && lanes.size() != 1) {
    invalid(fmt::format("bidirectional_single mode needs exactly 1 lane, got {}",
                        lanes.size()));
  }
  std::set<LaneId> ids;
  for (const auto& lane : lanes) {
    if (!ids.insert(lane.lane_id).second) invalid(fmt::format("duplicate lane id {}", lane.lane_id));
    if (!is_simple_polygon(lane.vertices)) {
      invalid(fmt::format("lane {} is not a simple polygon with >= 3 vertices", lane.lane_id));
    }
  }
  std::sort(lanes.begin(), lanes.end(),
            [](const LanePolygon& a, const LanePolygon& b) { return a.lane_id < b.lane_id; });
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    for (std::size_t j = i + 1; j < lanes.size(); ++j) {
      if (interiors_overlap(lanes[i].vertices, lanes[j].vertices)) {
        invalid(fmt::format("lanes {} and {} overlap", lanes[i].lane_id, lanes[j].lane_id));
      }
    }
  }
  return LaneMap(mode, std::move(lanes));
}

const LanePolygon* LaneMap::find(LaneId id) const {
  for (const auto& lane : lanes_) {
    if (lane.lane_id == id) return &lane;
  }
  return nullptr;
}

std::optional<LaneId> assign_lane(const RectifiedPoint& p, const LaneMap& map) {
  // Lanes are sorted by id, so the first hit is the lowest touching id.
  for (const auto& lane : map.lanes()) {
    if (classify_point(lane.vertices, p) != Containment::Outside) return lane.lane_id;
  }
  return std::nullopt;
}

std::optional<LaneId> track_lane(const Track& track, const LaneMap& map) {
  if (track.history.empty()) return std::nullopt;
  std::map<LaneId, std::size_t> votes;
  std::vector<std::optional<LaneId>> per_point;
  per_point.reserve(track.history.size());
  std::size_t outside = 0;
  for (const auto& pt : track.history) {
    const auto lane = assign_lane(pt.position, map);
    per_point.push_back(lane);
    if (lane) {
      ++votes[*lane];
    } else {
      ++outside;
    }
  }
  if (2 * outside > track.history.size() || votes.empty()) return std::nullopt;

  std::size_t best = 0;
  for (const auto& [id, count] : votes) best = std::max(best, count);
  for (auto it = per_point.rbegin(); it != per_point.rend(); ++it) {
    if (*it && votes[**it] == best) return *it;
  }
  return std::nullopt;
}

DirectionResult infer_direction(const Track& track, const LaneMap& map) {
  if (map.mode() != LaneMode::BidirectionalSingle) {
    throw Error(ErrorCode::WrongMode, "direction inference needs a bidirectional_single map");
  }
  if (track.history.empty()) return DirectionResult::Unresolved;
  const double dx = track.last().position.x - track.first().position.x;
  if (std::abs(dx) < kMinDirectionDisplacementPx) return DirectionResult::Unresolved;
  return dx > 0 ? DirectionResult::Down : DirectionResult::Up;
}

}  // namespace skyspeed
