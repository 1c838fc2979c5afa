#include "skyspeed/file_formats.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "skyspeed/error.hpp"

namespace skyspeed {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Small typed accessors shared by every document reader.
class Reader {
 public:
  Reader(ErrorCode code, std::string doc, std::optional<std::size_t> line = std::nullopt)
      : code_(code), doc_(std::move(doc)), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(code_, fmt::format("{}: {}", doc_, what), line_);
  }

  json parse(const std::string& text) const {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      fail(fmt::format("invalid JSON: {}", e.what()));
    }
  }

  const json& field(const json& obj, const char* key) const {
    if (!obj.is_object()) fail("expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(fmt::format("missing field \"{}\"", key));
    return *it;
  }

  bool has(const json& obj, const char* key) const {
    return obj.is_object() && obj.contains(key) && !obj.at(key).is_null();
  }

  double number(const json& v, const char* what) const {
    if (!v.is_number()) fail(fmt::format("\"{}\" must be a number", what));
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(fmt::format("\"{}\" must be finite", what));
    return d;
  }
  double number(const json& obj, const char* key, double fallback) const {
    return has(obj, key) ? number(obj.at(key), key) : fallback;
  }
  double number_field(const json& obj, const char* key) const { return number(field(obj, key), key); }

  std::int64_t integer(const json& v, const char* what) const {
    if (!v.is_number_integer()) fail(fmt::format("\"{}\" must be an integer", what));
    return v.get<std::int64_t>();
  }
  std::int64_t integer_field(const json& obj, const char* key) const {
    return integer(field(obj, key), key);
  }

  std::string string(const json& v, const char* what) const {
    if (!v.is_string()) fail(fmt::format("\"{}\" must be a string", what));
    return v.get<std::string>();
  }

  std::pair<double, double> pair(const json& v, const char* what) const {
    if (!v.is_array() || v.size() != 2) fail(fmt::format("\"{}\" must be a [x, y] pair", what));
    return {number(v[0], what), number(v[1], what)};
  }

  Category category(const json& v, const char* what) const {
    const auto c = parse_category(string(v, what));
    if (!c) fail(fmt::format("\"{}\" must be \"car\" or \"heavy\"", what));
    return *c;
  }

  std::optional<Direction> direction(const json& obj, const char* key) const {
    if (!has(obj, key)) return std::nullopt;
    const auto d = parse_direction(string(obj.at(key), key));
    if (!d) fail(fmt::format("\"{}\" must be \"up\", \"down\" or null", key));
    return d;
  }

 private:
  ErrorCode code_;
  std::string doc_;
  std::optional<std::size_t> line_;
};

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json direction_json(const std::optional<Direction>& d) {
  return d ? json(std::string(direction_name(*d))) : json(nullptr);
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string calibration_to_json(const RoiCalibration& cal, const Homography& h) {
  ordered_json j;
  j["source_corners"] = ordered_json::array();
  for (const auto& c : cal.source_corners) j["source_corners"].push_back({c.x, c.y});
  j["physical_length_ft"] = cal.physical_length_ft;
  j["physical_width_ft"] = cal.physical_width_ft;
  j["rectified_length_px"] = cal.rectified_length_px;
  j["rectified_width_px"] = cal.rectified_width_px;
  j["homography"] = h.row_major();
  j["feet_per_pixel_long"] = cal.feet_per_pixel_long;
  j["feet_per_pixel_lat"] = cal.feet_per_pixel_lat;
  return dump(j);
}

CalibrationFile calibration_from_json(const std::string& text) {
  const Reader r(ErrorCode::InvalidConfig, "calibration");
  const json j = r.parse(text);
  CalibrationFile out;
  auto& cal = out.calibration;
  const json& corners = r.field(j, "source_corners");
  if (!corners.is_array() || corners.size() != 4) r.fail("\"source_corners\" must hold 4 points");
  for (std::size_t i = 0; i < 4; ++i) {
    const auto [x, y] = r.pair(corners[i], "source_corners");
    cal.source_corners[i] = {x, y};
  }
  cal.physical_length_ft = r.number_field(j, "physical_length_ft");
  cal.physical_width_ft = r.number_field(j, "physical_width_ft");
  cal.rectified_length_px = r.number_field(j, "rectified_length_px");
  cal.rectified_width_px = r.number_field(j, "rectified_width_px");
  cal.feet_per_pixel_long = r.number_field(j, "feet_per_pixel_long");
  cal.feet_per_pixel_lat = r.number_field(j, "feet_per_pixel_lat");
  for (const double v : {cal.physical_length_ft, cal.physical_width_ft, cal.rectified_length_px,
                         cal.rectified_width_px, cal.feet_per_pixel_long, cal.feet_per_pixel_lat}) {
    if (!(v > 0.0)) r.fail("dimensions and feet-per-pixel factors must be > 0");
  }
  const auto consistent = [](double fpp, double ft, double px) {
    return std::abs(fpp - ft / px) <= 1e-9 * std::abs(ft / px);
  };
  if (!consistent(cal.feet_per_pixel_long, cal.physical_length_ft, cal.rectified_length_px) ||
      !consistent(cal.feet_per_pixel_lat, cal.physical_width_ft, cal.rectified_width_px)) {
    r.fail("feet-per-pixel factors disagree with the physical and rectified dimensions");
  }
  const json& hm = r.field(j, "homography");
  if (!hm.is_array() || hm.size() != 9) r.fail("\"homography\" must hold 9 numbers");
  std::array<double, 9> coeffs{};
  for (std::size_t i = 0; i < 9; ++i) coeffs[i] = r.number(hm[i], "homography");
  try {
    check_convex_corners(cal.source_corners);
    out.homography = Homography::from_row_major(coeffs);
  } catch (const Error& e) {
    r.fail(e.what());
  }
  return out;
}

std::string lane_map_to_json(const LaneMap& map) {
  ordered_json j;
  j["mode"] = lane_mode_name(map.mode());
  j["lanes"] = ordered_json::array();
  for (const auto& lane : map.lanes()) {
    ordered_json l;
    l["id"] = lane.lane_id;
    l["direction"] = direction_json(lane.direction);
    l["vertices"] = ordered_json::array();
    for (const auto& v : lane.vertices) l["vertices"].push_back({v.x, v.y});
    j["lanes"].push_back(std::move(l));
  }
  return dump(j);
}

LaneMap lane_map_from_json(const std::string& text) {
  const Reader r(ErrorCode::InvalidConfig, "lane map");
  const json j = r.parse(text);
  const auto mode = parse_lane_mode(r.string(r.field(j, "mode"), "mode"));
  if (!mode) r.fail("\"mode\" must be \"multi_lane\" or \"bidirectional_single\"");
  const json& lanes = r.field(j, "lanes");
  if (!lanes.is_array()) r.fail("\"lanes\" must be an array");
  std::vector<LanePolygon> polys;
  for (const auto& l : lanes) {
    LanePolygon p;
    const std::int64_t id = r.integer_field(l, "id");
    if (id < INT32_MIN || id > INT32_MAX) r.fail("lane id out of range");
    p.lane_id = static_cast<LaneId>(id);
    p.direction = r.direction(l, "direction");
    const json& verts = r.field(l, "vertices");
    if (!verts.is_array()) r.fail("\"vertices\" must be an array");
    for (const auto& v : verts) {
      const auto [x, y] = r.pair(v, "vertices");
      p.vertices.push_back({x, y});
    }
    polys.push_back(std::move(p));
  }
  try {
    return LaneMap::create(*mode, std::move(polys));
  } catch (const Error& e) {
    r.fail(e.what());
  }
}

std::string scene_to_json(const SceneSpec& s) {
  ordered_json j;
  j["label"] = s.label;
  j["camera"] = {{"height_ft", s.camera.height_ft},
                 {"tilt_deg", s.camera.tilt_rad * 180.0 / std::numbers::pi},
                 {"focal_px", s.camera.focal_px},
                 {"principal_point", {s.camera.principal_point.x, s.camera.principal_point.y}},
                 {"image_size", {s.camera.image_width, s.camera.image_height}}};
  j["roi"] = {{"length_ft", s.roi.length_ft},
              {"width_ft", s.roi.width_ft},
              {"rectified_length_px", s.roi.rectified_length_px},
              {"rectified_width_px", s.roi.rectified_width_px}};
  j["lane_mode"] = lane_mode_name(s.lane_mode);
  j["lanes"] = ordered_json::array();
  for (const auto& l : s.lanes) {
    j["lanes"].push_back(ordered_json{{"id", l.id},
                                      {"from_ft", l.from_ft},
                                      {"to_ft", l.to_ft},
                                      {"direction", direction_json(l.direction)}});
  }
  j["vehicles"] = ordered_json::array();
  for (const auto& v : s.vehicles) {
    j["vehicles"].push_back(
        ordered_json{{"category", category_name(v.category)},
                     {"speed_mph", v.speed_mph},
                     {"lane_offset_ft", v.lane_offset_ft},
                     {"entry_time_s", v.entry_time_s},
                     {"length_ft", v.length_ft},
                     {"width_ft", v.width_ft},
                     {"heading", v.heading == Heading::Forward ? "forward" : "reverse"}});
  }
  j["fps"] = s.fps;
  j["duration_s"] = s.duration_s;
  j["noise"] = {{"bbox_jitter_std_px", s.noise.bbox_jitter_std_px},
                {"miss_probability", s.noise.miss_probability},
                {"misclassify_probability", s.noise.misclassify_probability}};
  j["seed"] = s.noise.seed;
  return dump(j);
}

SceneSpec scene_from_json(const std::string& text) {
  const Reader r(ErrorCode::InvalidSpec, "scenario");
  const json j = r.parse(text);
  SceneSpec s;
  if (r.has(j, "label")) s.label = r.string(j.at("label"), "label");

  const json& cam = r.field(j, "camera");
  s.camera.height_ft = r.number_field(cam, "height_ft");
  s.camera.tilt_rad = r.number(cam, "tilt_deg", 0.0) * std::numbers::pi / 180.0;
  s.camera.focal_px = r.number_field(cam, "focal_px");
  if (r.has(cam, "image_size")) {
    const json& size = cam.at("image_size");
    if (!size.is_array() || size.size() != 2) r.fail("\"image_size\" must be [width, height]");
    s.camera.image_width = r.integer(size[0], "image_size");
    s.camera.image_height = r.integer(size[1], "image_size");
  }
  if (r.has(cam, "principal_point")) {
    const auto [x, y] = r.pair(cam.at("principal_point"), "principal_point");
    s.camera.principal_point = {x, y};
  } else {
    s.camera.principal_point = {static_cast<double>(s.camera.image_width) / 2.0,
                                static_cast<double>(s.camera.image_height) / 2.0};
  }

  const json& roi = r.field(j, "roi");
  s.roi.length_ft = r.number_field(roi, "length_ft");
  s.roi.width_ft = r.number_field(roi, "width_ft");
  constexpr double kDefaultPxPerFt = 5.0;
  s.roi.rectified_length_px = r.number(roi, "rectified_length_px", s.roi.length_ft * kDefaultPxPerFt);
  s.roi.rectified_width_px = r.number(roi, "rectified_width_px", s.roi.width_ft * kDefaultPxPerFt);

  if (r.has(j, "lane_mode")) {
    const auto mode = parse_lane_mode(r.string(j.at("lane_mode"), "lane_mode"));
    if (!mode) r.fail("\"lane_mode\" must be \"multi_lane\" or \"bidirectional_single\"");
    s.lane_mode = *mode;
  }
  if (r.has(j, "lanes")) {
    for (const auto& l : j.at("lanes")) {
      LaneStrip strip;
      strip.id = static_cast<LaneId>(r.integer_field(l, "id"));
      strip.from_ft = r.number_field(l, "from_ft");
      strip.to_ft = r.number_field(l, "to_ft");
      strip.direction = r.direction(l, "direction");
      s.lanes.push_back(strip);
    }
  }
  const json& vehicles = r.field(j, "vehicles");
  if (!vehicles.is_array()) r.fail("\"vehicles\" must be an array");
  for (const auto& v : vehicles) {
    VehicleSpec vs;
    vs.category = r.category(r.field(v, "category"), "category");
    vs.speed_mph = r.number_field(v, "speed_mph");
    vs.lane_offset_ft = r.number_field(v, "lane_offset_ft");
    vs.entry_time_s = r.number(v, "entry_time_s", 0.0);
    vs.length_ft = r.number(v, "length_ft", vs.category == Category::Car ? 15.0 : 40.0);
    vs.width_ft = r.number(v, "width_ft", vs.category == Category::Car ? 6.0 : 8.5);
    if (r.has(v, "heading")) {
      const std::string h = r.string(v.at("heading"), "heading");
      if (h == "forward") {
        vs.heading = Heading::Forward;
      } else if (h == "reverse") {
        vs.heading = Heading::Reverse;
      } else {
        r.fail("\"heading\" must be \"forward\" or \"reverse\"");
      }
    }
    s.vehicles.push_back(vs);
  }
  s.fps = r.number_field(j, "fps");
  s.duration_s = r.number_field(j, "duration_s");
  if (r.has(j, "noise")) {
    const json& n = j.at("noise");
    s.noise.bbox_jitter_std_px = r.number(n, "bbox_jitter_std_px", 0.0);
    s.noise.miss_probability = r.number(n, "miss_probability", 0.0);
    s.noise.misclassify_probability = r.number(n, "misclassify_probability", 0.0);
  }
  if (r.has(j, "seed")) {
    const json& seed = j.at("seed");
    if (!seed.is_number_unsigned()) r.fail("\"seed\" must be a non-negative integer");
    s.noise.seed = seed.get<std::uint64_t>();
  }
  validate(s);
  return s;
}

std::string truth_to_json(const std::string& label, std::span<const GroundTruthRecord> truth) {
  ordered_json j;
  j["label"] = label;
  j["vehicles"] = ordered_json::array();
  for (const auto& t : truth) {
    j["vehicles"].push_back(ordered_json{{"vehicle_key", t.vehicle_key},
                                         {"true_speed_mph", t.true_speed_mph},
                                         {"category", category_name(t.true_category)},
                                         {"lane", optional_json(t.true_lane)},
                                         {"direction", direction_json(t.true_direction)}});
  }
  return dump(j);
}

std::pair<std::string, std::vector<GroundTruthRecord>> truth_from_json(const std::string& text) {
  const Reader r(ErrorCode::MalformedRecord, "ground truth");
  const json j = r.parse(text);
  std::string label = r.has(j, "label") ? r.string(j.at("label"), "label") : std::string();
  const json& vehicles = r.field(j, "vehicles");
  if (!vehicles.is_array()) r.fail("\"vehicles\" must be an array");
  std::vector<GroundTruthRecord> out;
  for (const auto& v : vehicles) {
    GroundTruthRecord g;
    const json& key = r.field(v, "vehicle_key");
    g.vehicle_key = key.is_number_integer() ? key.dump() : r.string(key, "vehicle_key");
    g.true_speed_mph = r.number_field(v, "true_speed_mph");
    if (!(g.true_speed_mph > 0.0)) r.fail("\"true_speed_mph\" must be > 0");
    g.true_category = r.category(r.field(v, "category"), "category");
    if (r.has(v, "lane")) g.true_lane = static_cast<LaneId>(r.integer(v.at("lane"), "lane"));
    g.true_direction = r.direction(v, "direction");
    out.push_back(std::move(g));
  }
  return {std::move(label), std::move(out)};
}

std::string record_to_json_line(const SpeedRecord& rec) {
  ordered_json j;
  j["track_id"] = rec.track_id;
  j["category"] = category_name(rec.category);
  j["lane"] = optional_json(rec.lane);
  j["direction"] = direction_json(rec.direction);
  j["speed_mph"] = rec.speed_mph;
  j["frames"] = rec.frames;
  j["first_frame"] = rec.first_frame;
  j["last_frame"] = rec.last_frame;
  return j.dump();
}

std::string records_to_jsonl(std::span<const SpeedRecord> records) {
  std::string out;
  for (const auto& r : records) out += record_to_json_line(r) + "\n";
  return out;
}

std::vector<SpeedRecord> records_from_jsonl(const std::string& text) {
  std::vector<SpeedRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const Reader r(ErrorCode::MalformedRecord, "records", line_no);
    const json j = r.parse(line);
    SpeedRecord rec;
    rec.track_id = r.integer_field(j, "track_id");
    rec.category = r.category(r.field(j, "category"), "category");
    if (r.has(j, "lane")) rec.lane = static_cast<LaneId>(r.integer(j.at("lane"), "lane"));
    rec.direction = r.direction(j, "direction");
    rec.speed_mph = r.number_field(j, "speed_mph");
    if (rec.speed_mph < 0.0) r.fail("\"speed_mph\" must be >= 0");
    rec.frames = r.integer_field(j, "frames");
    rec.first_frame = r.integer_field(j, "first_frame");
    rec.last_frame = r.integer_field(j, "last_frame");
    out.push_back(rec);
  }
  return out;
}

std::string annotations_to_jsonl(std::span<const Annotation> annotations) {
  std::string out;
  for (const auto& a : annotations) {
    ordered_json j;
    j["frame"] = a.frame_index;
    j["track_id"] = a.track_id;
    j["category"] = category_name(a.category);
    j["image"] = {a.image.x, a.image.y};
    j["rectified"] = {a.rectified.x, a.rectified.y};
    j["running_speed_mph"] = optional_json(a.running_speed_mph);
    out += j.dump() + "\n";
  }
  return out;
}

std::string report_to_json(std::span<const MetricsReport> reports) {
  ordered_json j;
  j["sections"] = ordered_json::array();
  for (const auto& rep : reports) {
    ordered_json s;
    s["label"] = rep.label;
    s["rows"] = ordered_json::array();
    for (const auto& row : rep.rows) {
      const auto& m = row.metrics;
      s["rows"].push_back(ordered_json{{"low", row.bin.low},
                                       {"high", row.bin.high},
                                       {"n", m.n},
                                       {"real_avg", m.real_avg},
                                       {"detected_avg", m.detected_avg},
                                       {"mse", m.mse},
                                       {"mae", m.mae},
                                       {"pct_error", m.pct_error}});
    }
    s["avg_error"] = optional_json(rep.avg_error);
    s["categories"] = ordered_json::array();
    for (const auto& c : rep.categories) {
      s["categories"].push_back(ordered_json{{"category", category_name(c.category)},
                                             {"tp", c.tp},
                                             {"fp", c.fp},
                                             {"fn", c.fn},
                                             {"precision", c.precision},
                                             {"recall", c.recall},
                                             {"f1", c.f1}});
    }
    s["matched"] = rep.matched;
    s["unmatched_records"] = rep.unmatched_records;
    s["unmatched_truth"] = rep.unmatched_truth;
    s["out_of_range"] = rep.out_of_range;
    s["lane_checked"] = rep.lane_checked;
    s["lane_agreed"] = rep.lane_agreed;
    j["sections"].push_back(std::move(s));
  }
  return dump(j);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write {}", path.string()));
  out << contents;
  if (!out) throw Error(ErrorCode::Io, fmt::format("write to {} failed", path.string()));
}

}  // namespace skyspeed
