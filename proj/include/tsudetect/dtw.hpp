#pragma once
// Dynamic time warping with L1 local cost and the symmetric three-step
// pattern {(1,0), (0,1), (1,1)}, no slope weights and no path-length
// normalization.

#include "tsudetect/core.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace tsudetect::dtw {

struct DtwOptions {
  std::optional<std::size_t> band;  // Sakoe-Chiba half-width; nullopt = exact
  bool keep_path = false;
};

struct DtwResult {
  double distance = 0.0;
  // Zero-based (i, j) pairs from (0, 0) to (n-1, m-1) when requested.
  std::vector<std::pair<std::size_t, std::size_t>> path;
};

[[nodiscard]] DtwResult dtw_distance(std::span<const double> a, std::span<const double> b, const DtwOptions& opts = {});

// D(k, k) for each requested prefix length k, from a single DP over the
// longest prefix. Requires both series to have at least max(lengths) samples.
[[nodiscard]] std::vector<double> prefix_distances(std::span<const double> a, std::span<const double> b,
                                                   std::span<const std::size_t> lengths,
                                                   std::optional<std::size_t> band = std::nullopt);

enum class GaugeAggregation { Sum, Mean };

struct MultiGaugeOptions {
  std::optional<std::size_t> band;
  GaugeAggregation aggregation = GaugeAggregation::Sum;
};

// Aggregate of per-gauge DTW distances restricted to the first `steps`
// samples of each gauge row.
[[nodiscard]] double multi_gauge_dtw(const Matrix& chi, const Matrix& candidate, std::size_t steps,
                                     const MultiGaugeOptions& opts = {});

// multi_gauge_dtw for several ascending window lengths at once.
[[nodiscard]] std::vector<double> multi_gauge_dtw_windows(const Matrix& chi, const Matrix& candidate,
                                                          std::span<const std::size_t> steps,
                                                          const MultiGaugeOptions& opts = {});

// Position in `db` minimizing multi_gauge_dtw; ties go to the lowest id.
[[nodiscard]] std::size_t shortest_dtw_scenario(const ScenarioDatabase& db, const Matrix& chi, std::size_t steps,
                                                const MultiGaugeOptions& opts = {});

// shortest_dtw_scenario for several windows, sharing one DP per candidate.
[[nodiscard]] std::vector<std::size_t> shortest_dtw_scenarios(const ScenarioDatabase& db, const Matrix& chi,
                                                              std::span<const std::size_t> steps,
                                                              const MultiGaugeOptions& opts = {});

}  // namespace tsudetect::dtw
