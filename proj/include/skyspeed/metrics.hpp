#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skyspeed/detection_io.hpp"
#include "skyspeed/lanes.hpp"

namespace skyspeed {

struct SpeedPair {
  double true_mph = 0.0;
  double detected_mph = 0.0;
};

struct ErrorMetrics {
  double mse = 0.0;
  double mae = 0.0;
  double pct_error = 0.0;  // mean of |error| / true, in percent
  double real_avg = 0.0;
  double detected_avg = 0.0;
  std::size_t n = 0;
};

/// Throws EmptyInput for an empty list and InvalidArgument for values <= 0.
ErrorMetrics compute_error_metrics(std::span<const SpeedPair> pairs);

/// [low, high); the last bin of a BinSet also includes `high`.
struct SpeedBin {
  double low = 0.0;
  double high = 0.0;
};

class BinSet {
 public:
  /// Consecutive edges, e.g. {15, 25, 35, 45, 55}. Throws InvalidArgument
  /// unless there are >= 2 strictly increasing finite edges.
  static BinSet from_edges(std::span<const double> edges);
  static BinSet from_bins(std::vector<SpeedBin> bins);

  const std::vector<SpeedBin>& bins() const noexcept { return bins_; }
  std::optional<std::size_t> locate(double mph) const;

 private:
  explicit BinSet(std::vector<SpeedBin> bins) : bins_(std::move(bins)) {}
  std::vector<SpeedBin> bins_;
};

/// Parses "15,25,35,45,55".
BinSet parse_bin_edges(const std::string& text);

struct BinnedPairs {
  std::vector<std::vector<SpeedPair>> per_bin;
  std::size_t out_of_range = 0;
};

BinnedPairs bin_by_speed(std::span<const SpeedPair> pairs, const BinSet& bins);

struct CategoryScore {
  Category category = Category::Car;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Per-category scores, omitting categories absent from both sequences.
/// Throws LengthMismatch or EmptyInput.
std::vector<CategoryScore> f1_scores(std::span<const Category> predicted,
                                     std::span<const Category> truth);

/// One finalized vehicle as emitted by the pipeline.
struct SpeedRecord {
  std::int64_t track_id = 0;
  Category category = Category::Car;
  std::optional<LaneId> lane;
  std::optional<Direction> direction;
  double speed_mph = 0.0;
  std::int64_t frames = 0;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;

  /// Key joined against GroundTruthRecord::vehicle_key.
  std::string key() const { return std::to_string(track_id); }
};

struct GroundTruthRecord {
  std::string vehicle_key;
  double true_speed_mph = 0.0;
  Category true_category = Category::Car;
  std::optional<LaneId> true_lane;
  std::optional<Direction> true_direction;
};

struct BinRow {
  SpeedBin bin;
  ErrorMetrics metrics;
};

struct MetricsReport {
  std::string label;
  std::vector<BinRow> rows;       // non-empty bins only
  std::optional<double> avg_error;  // unweighted mean of row pct_error
  std::vector<CategoryScore> categories;
  std::size_t matched = 0;
  std::size_t unmatched_records = 0;
  std::size_t unmatched_truth = 0;
  std::size_t out_of_range = 0;
  std::size_t lane_checked = 0;
  std::size_t lane_agreed = 0;
};

/// Joins records to ground truth by key and computes binned speed errors
/// plus category F1. Throws DuplicateKey when a key repeats on either side.
MetricsReport build_report(std::span<const SpeedRecord> records,
                           std::span<const GroundTruthRecord> truth, const BinSet& bins,
                           std::string label = {});

/// Aligned plain-text table, one block per report.
std::string format_report_table(std::span<const MetricsReport> reports);

}  // namespace skyspeed
