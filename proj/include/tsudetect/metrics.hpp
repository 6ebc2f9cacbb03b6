#pragma once

#include "tsudetect/core.hpp"

#include <cstdint>
#include <span>
#include <utility>

namespace tsudetect::metrics {

inline constexpr double kDefaultWetThreshold = 0.01;  // meters

struct BinaryCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  [[nodiscard]] std::uint64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const BinaryCounts&) const = default;
};

struct BoxStats {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

[[nodiscard]] double absolute_error(double pred, double truth);

// A cell is wet iff depth > wet_threshold.
[[nodiscard]] BinaryCounts classify_inundation(const InundationGrid& pred, const InundationGrid& truth,
                                               double wet_threshold = kDefaultWetThreshold);

// (TPR, FPR). With no truly wet cells TPR is 1; with no truly dry cells FPR is 0.
[[nodiscard]] std::pair<double, double> tpr_fpr(const BinaryCounts& counts);

// Quantiles by linear interpolation between closest ranks (type 7).
[[nodiscard]] double quantile_sorted(std::span<const double> sorted, double q);
[[nodiscard]] BoxStats box_stats(std::span<const double> samples);

}  // namespace tsudetect::metrics
