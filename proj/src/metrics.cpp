#include "skyspeed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "skyspeed/error.hpp"

namespace skyspeed {

ErrorMetrics compute_error_metrics(std::span<const SpeedPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no speed pairs");
  ErrorMetrics m;
  for (const auto& p : pairs) {
    if (!(p.true_mph > 0.0) || !(p.detected_mph >= 0.0) || !std::isfinite(p.true_mph) ||
        !std::isfinite(p.detected_mph)) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("invalid speed pair ({}, {})", p.true_mph, p.detected_mph));
    }
    const double err = p.detected_mph - p.true_mph;
    m.mse += err * err;
    m.mae += std::abs(err);
    m.pct_error += std::abs(err) / p.true_mph;
    m.real_avg += p.true_mph;
    m.detected_avg += p.detected_mph;
  }
  const auto n = static_cast<double>(pairs.size());
  m.n = pairs.size();
  m.mse /= n;
  m.mae /= n;
  m.pct_error = m.pct_error / n * 100.0;
  m.real_avg /= n;
  m.detected_avg /= n;
  return m;
}

BinSet BinSet::from_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two bin edges");
  std::vector<SpeedBin> bins;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) bins.push_back({edges[i], edges[i + 1]});
  return from_bins(std::move(bins));
}

BinSet BinSet::from_bins(std::vector<SpeedBin> bins) {
  if (bins.empty()) throw Error(ErrorCode::InvalidArgument, "no speed bins");
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const auto& b = bins[i];
    if (!std::isfinite(b.low) || !std::isfinite(b.high) || !(b.low < b.high)) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("bin {} has low {} >= high {}", i, b.low, b.high));
    }
    if (i > 0 && bins[i - 1].high > b.low) {
      throw Error(ErrorCode::InvalidArgument, "bins overlap or are out of order");
    }
  }
  return BinSet(std::move(bins));
}

std::optional<std::size_t> BinSet::locate(double mph) const {
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    const bool last = i + 1 == bins_.size();
    if (mph >= bins_[i].low && (mph < bins_[i].high || (last && mph == bins_[i].high))) return i;
  }
  return std::nullopt;
}

BinSet parse_bin_edges(const std::string& text) {
  std::vector<double> edges;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      edges.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("bad bin edge \"{}\"", item));
    }
  }
  return BinSet::from_edges(edges);
}

BinnedPairs bin_by_speed(std::span<const SpeedPair> pairs, const BinSet& bins) {
  BinnedPairs out;
  out.per_bin.resize(bins.bins().size());
  for (const auto& p : pairs) {
    if (const auto idx = bins.locate(p.true_mph)) {
      out.per_bin[*idx].push_back(p);
    } else {
      ++out.out_of_range;
    }
  }
  return out;
}

std::vector<CategoryScore> f1_scores(std::span<const Category> predicted,
                                     std::span<const Category> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} predictions vs {} labels", predicted.size(), truth.size()));
  }
  if (predicted.empty()) throw Error(ErrorCode::EmptyInput, "no labels");
  std::vector<CategoryScore> out;
  for (const Category c : kAllCategories) {
    CategoryScore s;
    s.category = c;
    bool present = false;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      const bool p = predicted[i] == c;
      const bool t = truth[i] == c;
      present = present || p || t;
      if (p && t) ++s.tp;
      if (p && !t) ++s.fp;
      if (!p && t) ++s.fn;
    }
    if (!present) continue;
    const auto tp = static_cast<double>(s.tp);
    s.precision = s.tp + s.fp == 0 ? 0.0 : tp / static_cast<double>(s.tp + s.fp);
    s.recall = s.tp + s.fn == 0 ? 0.0 : tp / static_cast<double>(s.tp + s.fn);
    const double pr = s.precision + s.recall;
    s.f1 = pr == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / pr;
    out.push_back(s);
  }
  return out;
}

MetricsReport build_report(std::span<const SpeedRecord> records,
                           std::span<const GroundTruthRecord> truth, const BinSet& bins,
                           std::string label) {
  std::unordered_map<std::string, const GroundTruthRecord*> by_key;
  for (const auto& t : truth) {
    if (!by_key.emplace(t.vehicle_key, &t).second) {
      throw Error(ErrorCode::DuplicateKey,
                  fmt::format("ground truth key \"{}\" repeats", t.vehicle_key));
    }
  }
  MetricsReport report;
  report.label = std::move(label);

  std::unordered_set<std::string> seen;
  std::vector<SpeedPair> pairs;
  std::vector<Category> predicted;
  std::vector<Category> actual;
  for (const auto& r : records) {
    const std::string key = r.key();
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::DuplicateKey, fmt::format("record key \"{}\" repeats", key));
    }
    const auto it = by_key.find(key);
    if (it == by_key.end()) {
      ++report.unmatched_records;
      continue;
    }
    const GroundTruthRecord& t = *it->second;
    ++report.matched;
    pairs.push_back({t.true_speed_mph, r.speed_mph});
    predicted.push_back(r.category);
    actual.push_back(t.true_category);
    if (t.true_lane || t.true_direction) {
      ++report.lane_checked;
      if (r.lane == t.true_lane && r.direction == t.true_direction) ++report.lane_agreed;
    }
  }
  report.unmatched_truth = truth.size() - report.matched;

  const BinnedPairs binned = bin_by_speed(pairs, bins);
  report.out_of_range = binned.out_of_range;
  double pct_sum = 0.0;
  for (std::size_t i = 0; i < binned.per_bin.size(); ++i) {
    if (binned.per_bin[i].empty()) continue;
    report.rows.push_back({bins.bins()[i], compute_error_metrics(binned.per_bin[i])});
    pct_sum += report.rows.back().metrics.pct_error;
  }
  if (!report.rows.empty()) report.avg_error = pct_sum / static_cast<double>(report.rows.size());
  if (!predicted.empty()) report.categories = f1_scores(predicted, actual);
  return report;
}

namespace {

std::string bin_label(const SpeedBin& b) { return fmt::format("{:g}-{:g}", b.low, b.high); }

}  // namespace

std::string format_report_table(std::span<const MetricsReport> reports) {
  std::string out;
  const auto header = fmt::format("{:<14} {:<13} {:>9} {:>13} {:>9} {:>8} {:>8} {:>12}\n",
                                  "Height/ROI", "Speed Range", "Real Avg", "Detected Avg",
                                  "MSE", "MAE", "Error %", "Avg Error %");
  out += header;
  out += std::string(header.size() - 1, '-') + '\n';
  for (const auto& r : reports) {
    if (r.rows.empty()) {
      out += fmt::format("{:<14} {:<13}\n", r.label, "(no rows)");
    }
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const auto& m = r.rows[i].metrics;
      const std::string avg =
          i == 0 && r.avg_error ? fmt::format("{:.2f}", *r.avg_error) : std::string();
      out += fmt::format("{:<14} {:<13} {:>9.2f} {:>13.2f} {:>9.2f} {:>8.2f} {:>8.2f} {:>12}\n",
                         i == 0 ? r.label : std::string(), bin_label(r.rows[i].bin),
                         m.real_avg, m.detected_avg, m.mse, m.mae, m.pct_error, avg);
    }
    for (const auto& c : r.categories) {
      out += fmt::format("{:<14} F1[{}] = {:.1f}%  (P {:.3f}, R {:.3f}, TP {}, FP {}, FN {})\n",
                         "", category_name(c.category), c.f1 * 100.0, c.precision, c.recall,
                         c.tp, c.fp, c.fn);
    }
    out += fmt::format(
        "{:<14} matched {}, unmatched records {}, unmatched truth {}, outside bins {}",
        "", r.matched, r.unmatched_records, r.unmatched_truth, r.out_of_range);
    if (r.lane_checked > 0) {
      out += fmt::format(", lane/direction agreement {}/{}", r.lane_agreed, r.lane_checked);
    }
    out += "\n\n";
  }
  return out;
}

}  // namespace skyspeed
