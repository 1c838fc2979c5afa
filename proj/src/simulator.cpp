#include "skyspeed/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "skyspeed/error.hpp"
#include "skyspeed/speed.hpp"

namespace skyspeed {

namespace {

constexpr double kMinDepth = 1e-9;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidSpec, what); }

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

double SceneRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SceneRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ImagePoint project_ground_point(const CameraSpec& cam, const WorldPoint& world) {
  const double s = std::sin(cam.tilt_rad);
  const double c = std::cos(cam.tilt_rad);
  // Camera-relative vector to the ground point.
  const double px = world.x_ft;
  const double py = world.y_ft;
  const double pz = -cam.height_ft;
  const double right = py;
  const double down = -c * px - s * pz;
  const double depth = s * px - c * pz;
  if (!(depth > kMinDepth)) {
    throw Error(ErrorCode::BehindCamera,
                fmt::format("ground point ({:g}, {:g}) ft is behind the camera", world.x_ft,
                            world.y_ft));
  }
  return {cam.principal_point.x + cam.focal_px * right / depth,
          cam.principal_point.y + cam.focal_px * down / depth};
}

std::array<WorldPoint, 4> roi_world_corners(const CameraSpec& cam, const RoiSpec& roi) {
  const double h = cam.height_ft;
  const double len = roi.length_ft;
  const auto mid_angle = [&](double x0) {
    return (std::atan(x0 / h) + std::atan((x0 + len) / h)) / 2.0;
  };
  // mid_angle is increasing in x0; bisect for the tilt.
  double lo = -len - 100.0 * h;
  double hi = 100.0 * h;
  for (int i = 0; i < 200; ++i) {
    const double m = (lo + hi) / 2.0;
    (mid_angle(m) < cam.tilt_rad ? lo : hi) = m;
  }
  const double x0 = (lo + hi) / 2.0;
  const double y0 = -roi.width_ft / 2.0;
  return {WorldPoint{x0, y0}, WorldPoint{x0, y0 + roi.width_ft},
          WorldPoint{x0 + len, y0 + roi.width_ft}, WorldPoint{x0 + len, y0}};
}

void validate(const SceneSpec& spec) {
  const auto& cam = spec.camera;
  if (!finite_positive(cam.height_ft)) invalid("camera height must be > 0");
  if (!finite_positive(cam.focal_px)) invalid("camera focal must be > 0");
  if (!(cam.tilt_rad >= 0.0 && cam.tilt_rad < std::numbers::pi / 2.0)) {
    invalid("camera tilt must lie in [0, pi/2)");
  }
  if (cam.image_width <= 0 || cam.image_height <= 0) invalid("image size must be > 0");
  if (!std::isfinite(cam.principal_point.x) || !std::isfinite(cam.principal_point.y)) {
    invalid("principal point must be finite");
  }
  const auto& roi = spec.roi;
  if (!finite_positive(roi.length_ft) || !finite_positive(roi.width_ft) ||
      !finite_positive(roi.rectified_length_px) || !finite_positive(roi.rectified_width_px)) {
    invalid("ROI dimensions must be > 0");
  }
  if (!finite_positive(spec.fps)) invalid("fps must be > 0");
  if (!(spec.duration_s >= 0.0) || !std::isfinite(spec.duration_s)) {
    invalid("duration must be >= 0");
  }
  const auto& n = spec.noise;
  if (!(n.bbox_jitter_std_px >= 0.0) || !std::isfinite(n.bbox_jitter_std_px)) {
    invalid("bbox jitter must be >= 0");
  }
  if (!(n.miss_probability >= 0.0 && n.miss_probability < 1.0)) {
    invalid("miss probability must lie in [0, 1)");
  }
  if (!(n.misclassify_probability >= 0.0 && n.misclassify_probability < 1.0)) {
    invalid("misclassify probability must lie in [0, 1)");
  }
  for (std::size_t i = 0; i < spec.vehicles.size(); ++i) {
    const auto& v = spec.vehicles[i];
    if (!finite_positive(v.speed_mph)) invalid(fmt::format("vehicle {} speed must be > 0", i));
    if (!finite_positive(v.length_ft) || !finite_positive(v.width_ft)) {
      invalid(fmt::format("vehicle {} dimensions must be > 0", i));
    }
    if (!std::isfinite(v.lane_offset_ft) || !std::isfinite(v.entry_time_s)) {
      invalid(fmt::format("vehicle {} offset and entry time must be finite", i));
    }
  }
  for (const auto& lane : spec.lanes) {
    if (!(lane.from_ft < lane.to_ft)) invalid(fmt::format("lane {} has from >= to", lane.id));
  }
  const auto corners = roi_world_corners(cam, roi);
  for (const auto& c : corners) {
    ImagePoint p;
    try {
      p = project_ground_point(cam, c);
    } catch (const Error&) {
      invalid("ROI is not in front of the camera");
    }
    if (p.x < 0 || p.y < 0 || p.x > static_cast<double>(cam.image_width) ||
        p.y > static_cast<double>(cam.image_height)) {
      invalid(fmt::format("ROI corner projects outside the image at ({:.1f}, {:.1f})", p.x, p.y));
    }
  }
}

std::optional<LaneMap> scene_lane_map(const SceneSpec& spec) {
  if (spec.lanes.empty()) return std::nullopt;
  const double px_per_ft_lat = spec.roi.rectified_width_px / spec.roi.width_ft;
  const double len = spec.roi.rectified_length_px;
  std::vector<LanePolygon> polys;
  for (const auto& s : spec.lanes) {
    const double y0 = s.from_ft * px_per_ft_lat;
    const double y1 = s.to_ft * px_per_ft_lat;
    polys.push_back({s.id,
                     {RectifiedPoint{0.0, y0}, RectifiedPoint{len, y0}, RectifiedPoint{len, y1},
                      RectifiedPoint{0.0, y1}},
                     s.direction});
  }
  return LaneMap::create(spec.lane_mode, std::move(polys));
}

SimulatedScene simulate_scene(const SceneSpec& spec) {
  validate(spec);
  SimulatedScene scene;
  const auto& cam = spec.camera;
  const auto& roi = spec.roi;

  scene.roi_world_corners = roi_world_corners(cam, roi);
  RoiCorners image_corners;
  for (std::size_t i = 0; i < 4; ++i) {
    image_corners[i] = project_ground_point(cam, scene.roi_world_corners[i]);
  }
  std::tie(scene.calibration, scene.homography) = build_roi_calibration(
      image_corners, roi.length_ft, roi.width_ft, roi.rectified_length_px,
      roi.rectified_width_px);
  scene.lane_map = scene_lane_map(spec);

  scene.header.frame_rate = spec.fps;
  scene.header.frame_width = cam.image_width;
  scene.header.frame_height = cam.image_height;
  scene.header.source_id = spec.label.empty() ? "simulated" : spec.label;

  const double x0 = scene.roi_world_corners[0].x_ft;
  const double y0 = scene.roi_world_corners[0].y_ft;
  const auto frames = static_cast<std::int64_t>(std::floor(spec.duration_s * spec.fps + 1e-9));
  SceneRng rng(spec.noise.seed);

  std::vector<std::int64_t> first_seen(spec.vehicles.size(), -1);
  std::int64_t emitted = 0;
  for (std::int64_t k = 0; k < frames; ++k) {
    const double t = static_cast<double>(k) / spec.fps;
    for (std::size_t i = 0; i < spec.vehicles.size(); ++i) {
      const auto& v = spec.vehicles[i];
      // Draws happen for every vehicle on every frame so that one vehicle's
      // visibility never shifts another vehicle's noise.
      const double u_miss = rng.uniform();
      const double u_class = rng.uniform();
      std::array<double, 4> jitter{};
      for (auto& j : jitter) j = rng.normal() * spec.noise.bbox_jitter_std_px;

      const double travelled = v.speed_mph / kFtpsToMph * (t - v.entry_time_s);
      const double cx = v.heading == Heading::Forward ? x0 + travelled
                                                      : x0 + roi.length_ft - travelled;
      if (cx < x0 - v.length_ft || cx > x0 + roi.length_ft + v.length_ft) continue;
      const double cy = y0 + v.lane_offset_ft;

      BoundingBox box{std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
      for (const double dx : {-v.length_ft / 2.0, v.length_ft / 2.0}) {
        for (const double dy : {-v.width_ft / 2.0, v.width_ft / 2.0}) {
          const ImagePoint p = project_ground_point(cam, {cx + dx, cy + dy});
          box.x_min = std::min(box.x_min, p.x);
          box.y_min = std::min(box.y_min, p.y);
          box.x_max = std::max(box.x_max, p.x);
          box.y_max = std::max(box.y_max, p.y);
        }
      }
      const double w_lim = 0.45 * (box.x_max - box.x_min);
      const double h_lim = 0.45 * (box.y_max - box.y_min);
      box.x_min += std::clamp(jitter[0], -w_lim, w_lim);
      box.y_min += std::clamp(jitter[1], -h_lim, h_lim);
      box.x_max += std::clamp(jitter[2], -w_lim, w_lim);
      box.y_max += std::clamp(jitter[3], -h_lim, h_lim);

      Detection det;
      det.frame_index = k;
      det.bbox = box;
      det.category = v.category;
      det.confidence = 1.0;
      if (u_class < spec.noise.misclassify_probability) {
        det.category =
            v.category == Category::Car ? Category::HeavyVehicle : Category::Car;
      }
      // Same ROI test the pipeline applies to incoming detections.
      RectifiedPoint r;
      try {
        r = apply_homography(scene.homography, centroid(det));
      } catch (const Error&) {
        continue;
      }
      if (!scene.calibration.contains(r)) continue;
      if (u_miss < spec.noise.miss_probability) continue;

      if (first_seen[i] < 0) first_seen[i] = emitted;
      ++emitted;
      scene.detections.push_back(det);
      scene.detection_vehicle.push_back(i);
    }
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < spec.vehicles.size(); ++i) {
    if (first_seen[i] >= 0) order.push_back(i);
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return first_seen[a] < first_seen[b]; });
  std::vector<std::string> keys(spec.vehicles.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    keys[order[rank]] = std::to_string(rank + 1);
  }
  for (std::size_t i = 0; i < spec.vehicles.size(); ++i) {
    const auto& v = spec.vehicles[i];
    GroundTruthRecord g;
    g.vehicle_key = first_seen[i] >= 0 ? keys[i] : fmt::format("unseen-{}", i);
    g.true_speed_mph = v.speed_mph;
    g.true_category = v.category;
    for (const auto& lane : spec.lanes) {
      if (v.lane_offset_ft >= lane.from_ft && v.lane_offset_ft < lane.to_ft) {
        if (spec.lane_mode == LaneMode::MultiLane) {
          g.true_lane = lane.id;
          g.true_direction = lane.direction;
        } else {
          g.true_direction = v.heading == Heading::Forward ? Direction::Down : Direction::Up;
        }
        break;
      }
    }
    scene.truth.push_back(std::move(g));
  }
  return scene;
}

}  // namespace skyspeed
