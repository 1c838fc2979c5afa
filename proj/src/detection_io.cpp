#include "skyspeed/detection_io.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "skyspeed/error.hpp"

namespace skyspeed {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedRecord, what, line);
}

const json& require(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) malformed(line, fmt::format("missing field \"{}\"", key));
  return *it;
}

double require_number(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_number()) malformed(line, fmt::format("field \"{}\" must be a number", key));
  const double d = v.get<double>();
  if (!std::isfinite(d)) malformed(line, fmt::format("field \"{}\" must be finite", key));
  return d;
}

std::int64_t require_integer(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(INT64_MAX)) {
      malformed(line, fmt::format("field \"{}\" is out of range", key));
    }
    return static_cast<std::int64_t>(u);
  }
  if (v.is_number_integer()) return v.get<std::int64_t>();
  malformed(line, fmt::format("field \"{}\" must be an integer", key));
}

StreamHeader header_from_json(const json& j, std::size_t line) {
  StreamHeader h;
  h.frame_rate = require_number(j, "fps", line);
  h.frame_width = require_integer(j, "width", line);
  h.frame_height = require_integer(j, "height", line);
  const json& id = require(j, "source_id", line);
  if (!id.is_string()) malformed(line, "field \"source_id\" must be a string");
  h.source_id = id.get<std::string>();
  try {
    validate(h);
  } catch (const Error& e) {
    malformed(line, e.what());
  }
  return h;
}

Detection detection_from_json(const json& j, std::size_t line) {
  Detection d;
  d.frame_index = require_integer(j, "frame", line);
  const json& box = require(j, "bbox", line);
  if (!box.is_array() || box.size() != 4) {
    malformed(line, "field \"bbox\" must be an array of 4 numbers");
  }
  std::array<double, 4> b{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!box[i].is_number()) malformed(line, "field \"bbox\" must be an array of 4 numbers");
    b[i] = box[i].get<double>();
  }
  d.bbox = {b[0], b[1], b[2], b[3]};
  const json& cat = require(j, "category", line);
  if (!cat.is_string()) malformed(line, "field \"category\" must be a string");
  const auto parsed = parse_category(cat.get_ref<const std::string&>());
  if (!parsed) {
    malformed(line, fmt::format("unknown category \"{}\"", cat.get_ref<const std::string&>()));
  }
  d.category = *parsed;
  d.confidence = require_number(j, "conf", line);
  try {
    validate(d);
  } catch (const Error& e) {
    malformed(line, e.what());
  }
  return d;
}

std::string dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

}  // namespace

std::string_view category_name(Category c) {
  return c == Category::Car ? "car" : "heavy";
}

std::optional<Category> parse_category(std::string_view name) {
  if (name == "car") return Category::Car;
  if (name == "heavy") return Category::HeavyVehicle;
  return std::nullopt;
}

ImagePoint centroid(const Detection& d) {
  return {(d.bbox.x_min + d.bbox.x_max) / 2.0, (d.bbox.y_min + d.bbox.y_max) / 2.0};
}

void validate(const StreamHeader& h) {
  if (!(h.frame_rate > 0.0) || !std::isfinite(h.frame_rate)) {
    throw Error(ErrorCode::MalformedRecord, "fps must be finite and > 0");
  }
  if (h.frame_width <= 0 || h.frame_height <= 0) {
    throw Error(ErrorCode::MalformedRecord, "frame dimensions must be > 0");
  }
}

void validate(const Detection& d) {
  if (d.frame_index < 0) throw Error(ErrorCode::MalformedRecord, "frame must be >= 0");
  const auto& b = d.bbox;
  for (const double v : {b.x_min, b.y_min, b.x_max, b.y_max}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::MalformedRecord, "bbox must be finite");
  }
  if (!(b.x_min < b.x_max)) throw Error(ErrorCode::MalformedRecord, "bbox x_min >= x_max");
  if (!(b.y_min < b.y_max)) throw Error(ErrorCode::MalformedRecord, "bbox y_min >= y_max");
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw Error(ErrorCode::MalformedRecord, "conf must lie in [0, 1]");
  }
}

StreamReader::StreamReader(std::istream& in) : in_(in) {}

bool StreamReader::next_record(std::string& line) {
  while (std::getline(in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) return true;
  }
  return false;
}

const StreamHeader& StreamReader::header() {
  if (header_) return *header_;
  std::string line;
  if (!next_record(line)) throw Error(ErrorCode::MissingHeader, "stream is empty", line_ + 1);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    malformed(line_, fmt::format("invalid JSON: {}", e.what()));
  }
  if (!j.is_object()) malformed(line_, "record must be a JSON object");
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) malformed(line_, "record has no string \"type\"");
  if (*type != "header") {
    throw Error(ErrorCode::MissingHeader, "first record is not a header", line_);
  }
  header_ = header_from_json(j, line_);
  return *header_;
}

std::optional<Detection> StreamReader::next() {
  header();
  std::string line;
  if (!next_record(line)) return std::nullopt;
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    malformed(line_, fmt::format("invalid JSON: {}", e.what()));
  }
  if (!j.is_object()) malformed(line_, "record must be a JSON object");
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) malformed(line_, "record has no string \"type\"");
  if (*type == "header") malformed(line_, "duplicate header record");
  if (*type != "det") malformed(line_, fmt::format("unknown record type {}", type->dump()));
  Detection d = detection_from_json(j, line_);
  if (d.frame_index < last_frame_) {
    throw Error(ErrorCode::NonMonotonicFrames,
                fmt::format("frame {} follows frame {}", d.frame_index, last_frame_), line_);
  }
  last_frame_ = d.frame_index;
  return d;
}

DetectionStream read_stream(std::istream& in) {
  StreamReader reader(in);
  DetectionStream out;
  out.header = reader.header();
  while (auto d = reader.next()) out.detections.push_back(*d);
  return out;
}

DetectionStream parse_stream(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_stream(in);
}

std::string serialize_header(const StreamHeader& h) {
  ordered_json j;
  j["type"] = "header";
  j["fps"] = h.frame_rate;
  j["width"] = h.frame_width;
  j["height"] = h.frame_height;
  j["source_id"] = h.source_id;
  return dump(j);
}

std::string serialize_detection(const Detection& d) {
  ordered_json j;
  j["type"] = "det";
  j["frame"] = d.frame_index;
  j["bbox"] = {d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max};
  j["category"] = category_name(d.category);
  j["conf"] = d.confidence;
  return dump(j);
}

std::string serialize_stream(const StreamHeader& header, std::span<const Detection> detections) {
  std::string out = serialize_header(header);
  out += '\n';
  for (const auto& d : detections) {
    out += serialize_detection(d);
    out += '\n';
  }
  return out;
}

}  // namespace skyspeed
