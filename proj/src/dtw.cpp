#include "tsudetect/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsudetect::dtw {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t effective_band(std::optional<std::size_t> band, std::size_t n, std::size_t m) {
  if (!band) return std::max(n, m);
  // The band must at least admit the corner-to-corner path.
  return std::max(*band, n > m ? n - m : m - n);
}

void check_nonempty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("dtw: series must be nonempty");
}

}  // namespace

DtwResult dtw_distance(std::span<const double> a, std::span<const double> b, const DtwOptions& opts) {
  check_nonempty(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t w = effective_band(opts.band, n, m);

  DtwResult result;
  if (!opts.keep_path) {
    std::vector<double> prev(m, kInf), cur(m, kInf);
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(cur.begin(), cur.end(), kInf);
      const std::size_t lo = i > w ? i - w : 0;
      const std::size_t hi = std::min(m - 1, i + w);
      for (std::size_t j = lo; j <= hi; ++j) {
        const double cost = std::abs(a[i] - b[j]);
        double best;
        if (i == 0 && j == 0) {
          best = 0.0;
        } else {
          best = kInf;
          if (i > 0) best = std::min(best, prev[j]);
          if (j > 0) best = std::min(best, cur[j - 1]);
          if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
        }
        cur[j] = cost + best;
      }
      std::swap(prev, cur);
    }
    result.distance = prev[m - 1];
    return result;
  }

  std::vector<double> dp(n * m, kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return dp[i * m + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > w ? i - w : 0;
    const std::size_t hi = std::min(m - 1, i + w);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double cost = std::abs(a[i] - b[j]);
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = kInf;
        if (i > 0) best = std::min(best, at(i - 1, j));
        if (j > 0) best = std::min(best, at(i, j - 1));
        if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
      }
      at(i, j) = cost + best;
    }
  }
  result.distance = at(n - 1, m - 1);

  // Backtrack preferring the diagonal on ties.
  std::size_t i = n - 1, j = m - 1;
  result.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = at(i - 1, j - 1), up = at(i - 1, j), left = at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    result.path.emplace_back(i, j);
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

std::vector<double> prefix_distances(std::span<const double> a, std::span<const double> b,
                                     std::span<const std::size_t> lengths, std::optional<std::size_t> band) {
  check_nonempty(a, b);
  if (lengths.empty()) return {};
  const std::size_t len = *std::max_element(lengths.begin(), lengths.end());
  if (len == 0) throw ArgumentError("dtw: window of zero samples");
  if (a.size() < len || b.size() < len) throw ArgumentError("dtw: window longer than the series");
  const std::size_t w = band ? *band : len;

  // diag[k] = D(k, k) of the DP over a[0..len) x b[0..len), which is exactly
  // the DTW distance of the length-(k+1) prefixes.
  std::vector<double> diag(len, kInf);
  std::vector<double> prev(len, kInf), cur(len, kInf);
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t lo = i > w ? i - w : 0;
    const std::size_t hi = std::min(len - 1, i + w);
    if (lo > 0) cur[lo - 1] = kInf;
    const double ai = a[i];
    for (std::size_t j = lo; j <= hi; ++j) {
      double best;
      if (i == 0) {
        best = j == 0 ? 0.0 : cur[j - 1];
      } else if (j == 0) {
        best = prev[0];
      } else {
        best = std::min({prev[j], prev[j - 1], cur[j - 1]});
      }
      cur[j] = std::abs(ai - b[j]) + best;
    }
    if (hi + 1 < len) cur[hi + 1] = kInf;
    diag[i] = cur[i];
    std::swap(prev, cur);
  }
  std::vector<double> out(lengths.size());
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    if (lengths[k] == 0) throw ArgumentError("dtw: window of zero samples");
    out[k] = diag[lengths[k] - 1];
  }
  return out;
}

std::vector<double> multi_gauge_dtw_windows(const Matrix& chi, const Matrix& candidate,
                                            std::span<const std::size_t> steps, const MultiGaugeOptions& opts) {
  if (chi.rows() != candidate.rows()) {
    throw ArgumentError("dtw: gauge count mismatch (" + std::to_string(chi.rows()) + " vs " +
                        std::to_string(candidate.rows()) + ")");
  }
  if (chi.rows() == 0) throw ArgumentError("dtw: no gauges");
  std::vector<double> total(steps.size(), 0.0);
  std::vector<double> row_a(static_cast<std::size_t>(chi.cols())), row_b(static_cast<std::size_t>(candidate.cols()));
  for (Eigen::Index g = 0; g < chi.rows(); ++g) {
    for (Eigen::Index m = 0; m < chi.cols(); ++m) row_a[static_cast<std::size_t>(m)] = chi(g, m);
    for (Eigen::Index m = 0; m < candidate.cols(); ++m) row_b[static_cast<std::size_t>(m)] = candidate(g, m);
    const auto d = prefix_distances(row_a, row_b, steps, opts.band);
    for (std::size_t k = 0; k < steps.size(); ++k) total[k] += d[k];
  }
  if (opts.aggregation == GaugeAggregation::Mean) {
    for (double& t : total) t /= static_cast<double>(chi.rows());
  }
  return total;
}

double multi_gauge_dtw(const Matrix& chi, const Matrix& candidate, std::size_t steps, const MultiGaugeOptions& opts) {
  const std::size_t window[] = {steps};
  return multi_gauge_dtw_windows(chi, candidate, window, opts).front();
}

std::vector<std::size_t> shortest_dtw_scenarios(const ScenarioDatabase& db, const Matrix& chi,
                                                std::span<const std::size_t> steps, const MultiGaugeOptions& opts) {
  if (db.empty()) throw ArgumentError("dtw: empty database");
  std::vector<std::size_t> best(steps.size(), 0);
  std::vector<double> best_d(steps.size(), kInf);
  for (std::size_t j = 0; j < db.size(); ++j) {
    const auto d = multi_gauge_dtw_windows(chi, db.scenarios[j].waveforms, steps, opts);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const bool better = d[k] < best_d[k] ||
                          (d[k] == best_d[k] && db.scenarios[j].scenario_id < db.scenarios[best[k]].scenario_id);
      if (j == 0 || better) {
        best[k] = j;
        best_d[k] = d[k];
      }
    }
  }
  return best;
}

std::size_t shortest_dtw_scenario(const ScenarioDatabase& db, const Matrix& chi, std::size_t steps,
                                  const MultiGaugeOptions& opts) {
  const std::size_t window[] = {steps};
  return shortest_dtw_scenarios(db, chi, window, opts).front();
}

}  // namespace tsudetect::dtw
