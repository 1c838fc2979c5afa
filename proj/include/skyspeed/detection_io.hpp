#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skyspeed/calibration.hpp"

namespace skyspeed {

enum class Category { Car, HeavyVehicle };

inline constexpr std::array<Category, 2> kAllCategories = {Category::Car,
                                                           Category::HeavyVehicle};

/// Wire names: "car" and "heavy".
std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view name);

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  std::int64_t frame_index = 0;
  BoundingBox bbox;
  Category category = Category::Car;
  double confidence = 1.0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct StreamHeader {
  double frame_rate = 30.0;
  std::int64_t frame_width = 0;
  std::int64_t frame_height = 0;
  std::string source_id;
  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

struct DetectionStream {
  StreamHeader header;
  std::vector<Detection> detections;
  friend bool operator==(const DetectionStream&, const DetectionStream&) = default;
};

/// Bounding-box centre, the vehicle reference point.
ImagePoint centroid(const Detection& d);

/// Validates field ranges; throws MalformedRecord.
void validate(const StreamHeader& header);
void validate(const Detection& detection);

/// Incremental reader over a line-delimited JSON stream. The first record
/// must be the header; each later call to next() yields one detection in
/// non-decreasing frame order. Blank lines are skipped.
class StreamReader {
 public:
  explicit StreamReader(std::istream& in);

  /// Reads up to and including the header line. Throws MissingHeader or
  /// MalformedRecord.
  const StreamHeader& header();

  /// Next detection, or nullopt at end of input.
  std::optional<Detection> next();

  std::size_t line_number() const noexcept { return line_; }

 private:
  bool next_record(std::string& line);

  std::istream& in_;
  std::optional<StreamHeader> header_;
  std::size_t line_ = 0;
  std::int64_t last_frame_ = -1;
};

DetectionStream parse_stream(std::string_view text);
DetectionStream read_stream(std::istream& in);

std::string serialize_header(const StreamHeader& header);
std::string serialize_detection(const Detection& detection);
std::string serialize_stream(const StreamHeader& header, std::span<const Detection> detections);

}  // namespace skyspeed
