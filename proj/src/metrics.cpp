#include "tsudetect/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tsudetect::metrics {

double absolute_error(double pred, double truth) {
  if (!std::isfinite(pred) || !std::isfinite(truth)) throw DataError("absolute_error: non-finite input");
  return std::abs(pred - truth);
}

BinaryCounts classify_inundation(const InundationGrid& pred, const InundationGrid& truth, double wet_threshold) {
  if (pred.nx != truth.nx || pred.ny != truth.ny || pred.size() != truth.size()) {
    throw ArgumentError("classify_inundation: grid shapes differ (" + std::to_string(pred.nx) + "x" +
                        std::to_string(pred.ny) + " vs " + std::to_string(truth.nx) + "x" + std::to_string(truth.ny) +
                        ")");
  }
  BinaryCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred.depths[i] > wet_threshold;
    const bool t = truth.depths[i] > wet_threshold;
    if (p && t) {
      ++c.tp;
    } else if (!p && !t) {
      ++c.tn;
    } else if (p) {
      ++c.fp;
    } else {
      ++c.fn;
    }
  }
  return c;
}

std::pair<double, double> tpr_fpr(const BinaryCounts& counts) {
  const auto wet = counts.tp + counts.fn;
  const auto dry = counts.fp + counts.tn;
  const double tpr = wet == 0 ? 1.0 : static_cast<double>(counts.tp) / static_cast<double>(wet);
  const double fpr = dry == 0 ? 0.0 : static_cast<double>(counts.fp) / static_cast<double>(dry);
  return {tpr, fpr};
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ArgumentError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> samples) {
  if (samples.empty()) throw ArgumentError("box_stats: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  BoxStats s;
  s.count = sorted.size();
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(sorted.size());
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.iqr = s.q3 - s.q1;
  return s;
}

}  // namespace tsudetect::metrics
