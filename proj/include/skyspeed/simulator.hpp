#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "skyspeed/calibration.hpp"
#include "skyspeed/detection_io.hpp"
#include "skyspeed/lanes.hpp"
#include "skyspeed/metrics.hpp"

namespace skyspeed {

/// Pinhole camera above a flat road. World x runs along the road (direction
/// of travel), y across it, z up. The camera sits at (0, 0, height) and is
/// pitched forward (+x) by `tilt_rad` from nadir; image u grows with world
/// y and image v shrinks with world x.
struct CameraSpec {
  double height_ft = 131.23;
  double tilt_rad = 0.0;
  double focal_px = 1000.0;
  ImagePoint principal_point{1920.0, 1080.0};
  std::int64_t image_width = 3840;
  std::int64_t image_height = 2160;
};

struct WorldPoint {
  double x_ft = 0.0;
  double y_ft = 0.0;
};

/// Throws BehindCamera when the point has non-positive depth.
ImagePoint project_ground_point(const CameraSpec& cam, const WorldPoint& world);

enum class Heading { Forward, Reverse };

struct VehicleSpec {
  Category category = Category::Car;
  double speed_mph = 30.0;
  double lane_offset_ft = 0.0;  // centre line, measured from the ROI's left edge
  double entry_time_s = 0.0;    // time the centre crosses the entry edge
  double length_ft = 15.0;
  double width_ft = 6.0;
  Heading heading = Heading::Forward;
};

struct NoiseSpec {
  double bbox_jitter_std_px = 0.0;
  double miss_probability = 0.0;
  double misclassify_probability = 0.0;
  std::uint64_t seed = 0;
};

struct RoiSpec {
  double length_ft = 144.0;
  double width_ft = 36.0;
  double rectified_length_px = 720.0;
  double rectified_width_px = 180.0;
};

/// Lateral band [from_ft, to_ft) of the ROI that forms one lane.
struct LaneStrip {
  LaneId id = 1;
  double from_ft = 0.0;
  double to_ft = 12.0;
  std::optional<Direction> direction;
};

struct SceneSpec {
  std::string label;
  CameraSpec camera;
  RoiSpec roi;
  std::vector<VehicleSpec> vehicles;
  double fps = 30.0;
  double duration_s = 10.0;
  NoiseSpec noise;
  LaneMode lane_mode = LaneMode::MultiLane;
  std::vector<LaneStrip> lanes;
};

struct SimulatedScene {
  StreamHeader header;
  std::vector<Detection> detections;
  /// Index into SceneSpec::vehicles for every detection.
  std::vector<std::size_t> detection_vehicle;
  /// One record per vehicle, in spec order. Keys follow the order in which
  /// vehicles first emit a detection ("1", "2", ...), which is the order the
  /// tracker allocates ids; vehicles never seen get "unseen-<index>".
  std::vector<GroundTruthRecord> truth;
  RoiCalibration calibration;
  Homography homography;
  std::optional<LaneMap> lane_map;
  std::array<WorldPoint, 4> roi_world_corners;
};

/// Deterministic generator: std::mt19937_64 for raw bits, uniform doubles
/// from the top 53 bits, normals by Box-Muller (one normal per two
/// uniforms). All three are fixed so fixtures are portable.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// ROI rectangle on the road, placed so its near and far edges sit at equal
/// angles either side of the optical axis and centred laterally under the
/// camera. Corner order near-left, near-right, far-right, far-left.
std::array<WorldPoint, 4> roi_world_corners(const CameraSpec& cam, const RoiSpec& roi);

/// Throws InvalidSpec on out-of-range parameters or an ROI that is not fully
/// inside the image.
void validate(const SceneSpec& spec);

SimulatedScene simulate_scene(const SceneSpec& spec);

/// Lane polygons in rectified pixels built from the scene's lane strips.
std::optional<LaneMap> scene_lane_map(const SceneSpec& spec);

}  // namespace skyspeed
