#pragma once
// Domain types shared by every stage of the scenario-detection pipeline:
// gauge waveforms, inundation grids, scenario records and the database that
// holds them. Units are meters and seconds throughout.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tsudetect {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error hierarchy. Each stage throws the most specific kind it can.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite or otherwise corrupt numerical data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Not enough samples to cover a requested horizon.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Invalid or degenerate configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Scenarios in a database disagree on shapes, ids or sampling.
class InconsistentDatabaseError : public Error {
 public:
  using Error::Error;
};

// Invalid argument shapes passed to a numerical routine.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Filesystem or format failures.
class IoError : public Error {
 public:
  using Error::Error;
};

struct GaugeSeries {
  int gauge_id = 0;
  double dt = 5.0;
  std::vector<double> samples;

  // Time of sample m (zero-based); the grid starts at dt, not 0.
  [[nodiscard]] double time_at(std::size_t m) const { return dt * static_cast<double>(m + 1); }
};

// nx x ny grid of maximum inundation depth, stored row-major (x major).
struct InundationGrid {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> depths;

  InundationGrid() = default;
  InundationGrid(std::size_t nx_, std::size_t ny_, double fill = 0.0)
      : nx(nx_), ny(ny_), depths(nx_ * ny_, fill) {}

  [[nodiscard]] double& at(std::size_t ix, std::size_t iy) { return depths[ix * ny + iy]; }
  [[nodiscard]] double at(std::size_t ix, std::size_t iy) const { return depths[ix * ny + iy]; }
  [[nodiscard]] std::size_t size() const { return depths.size(); }
  [[nodiscard]] double max_depth() const;

  bool operator==(const InundationGrid&) const = default;
};

// One precomputed scenario. `waveforms` is N_g x N_t with one gauge per row;
// column m holds the snapshot at time (m + 1) * dt.
struct ScenarioRecord {
  int scenario_id = 0;
  Matrix waveforms;
  InundationGrid inundation;
  std::vector<double> eta_max_per_gauge;
  double h_max = 0.0;

  [[nodiscard]] std::size_t n_gauges() const { return static_cast<std::size_t>(waveforms.rows()); }
  [[nodiscard]] std::size_t n_steps() const { return static_cast<std::size_t>(waveforms.cols()); }
  [[nodiscard]] GaugeSeries gauge(std::size_t g, double dt) const;
};

// Labeled grid metadata. No projection math is applied to these values.
struct GridGeometry {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double spacing = 1.0;
  std::string label;

  bool operator==(const GridGeometry&) const = default;
};

struct ScenarioDatabase {
  std::size_t n_gauges = 0;
  std::size_t n_steps = 0;
  double dt = 5.0;
  GridGeometry grid;
  std::vector<ScenarioRecord> scenarios;

  [[nodiscard]] std::size_t size() const { return scenarios.size(); }
  [[nodiscard]] bool empty() const { return scenarios.empty(); }
  [[nodiscard]] double horizon() const { return dt * static_cast<double>(n_steps); }

  // Shape and id checks; throws InconsistentDatabaseError.
  void validate() const;

  // Copy with only the scenarios at the given positions, in that order.
  [[nodiscard]] ScenarioDatabase subset(std::span<const std::size_t> positions) const;
};

class ObservationWindow {
 public:
  ObservationWindow() = default;
  // Throws ConfigError unless 0 < t_obs <= horizon (when horizon > 0).
  ObservationWindow(double t_obs, double dt, double horizon = 0.0);

  [[nodiscard]] double t_obs() const { return t_obs_; }
  [[nodiscard]] std::size_t step_count() const { return steps_; }

 private:
  double t_obs_ = 0.0;
  std::size_t steps_ = 0;
};

// Recomputes eta_max_per_gauge and h_max from the raw waveforms and grid.
// Throws DataError naming the scenario and gauge on non-finite samples.
[[nodiscard]] ScenarioRecord recompute_risk_indices(ScenarioRecord record);

// Linear interpolation of (time, value) pairs onto t = dt, 2dt, ..., horizon.
[[nodiscard]] GaugeSeries resample_series(std::span<const std::pair<double, double>> raw, double dt,
                                          double horizon, int gauge_id = 0);

}  // namespace tsudetect
