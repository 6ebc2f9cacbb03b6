#include "tsudetect/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace tsudetect {

double InundationGrid::max_depth() const {
  double best = 0.0;
  for (double d : depths) best = std::max(best, d);
  return best;
}

GaugeSeries ScenarioRecord::gauge(std::size_t g, double dt) const {
  GaugeSeries s;
  s.gauge_id = static_cast<int>(g);
  s.dt = dt;
  s.samples.resize(n_steps());
  for (std::size_t m = 0; m < n_steps(); ++m) s.samples[m] = waveforms(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(m));
  return s;
}

void ScenarioDatabase::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InconsistentDatabaseError("database dt must be positive");
  std::set<int> ids;
  for (const auto& s : scenarios) {
    if (s.n_gauges() != n_gauges || s.n_steps() != n_steps) {
      throw InconsistentDatabaseError("scenario " + std::to_string(s.scenario_id) + " has waveform shape " +
                                      std::to_string(s.n_gauges()) + "x" + std::to_string(s.n_steps()) +
                                      ", expected " + std::to_string(n_gauges) + "x" + std::to_string(n_steps));
    }
    if (s.inundation.nx != grid.nx || s.inundation.ny != grid.ny || s.inundation.size() != grid.nx * grid.ny) {
      throw InconsistentDatabaseError("scenario " + std::to_string(s.scenario_id) + " has a mismatched inundation grid");
    }
    if (s.eta_max_per_gauge.size() != n_gauges) {
      throw InconsistentDatabaseError("scenario " + std::to_string(s.scenario_id) + " is missing risk indices");
    }
    if (!ids.insert(s.scenario_id).second) {
      throw InconsistentDatabaseError("duplicate scenario id " + std::to_string(s.scenario_id));
    }
  }
}

ScenarioDatabase ScenarioDatabase::subset(std::span<const std::size_t> positions) const {
  ScenarioDatabase out;
  out.n_gauges = n_gauges;
  out.n_steps = n_steps;
  out.dt = dt;
  out.grid = grid;
  out.scenarios.reserve(positions.size());
  for (std::size_t p : positions) out.scenarios.push_back(scenarios.at(p));
  return out;
}

ObservationWindow::ObservationWindow(double t_obs, double dt, double horizon) : t_obs_(t_obs) {
  if (!(dt > 0.0)) throw ConfigError("sampling period must be positive");
  if (!(t_obs > 0.0)) throw ConfigError("observation window must be positive");
  if (horizon > 0.0 && t_obs > horizon * (1.0 + 1e-12)) {
    throw ConfigError("observation window " + std::to_string(t_obs) + " s exceeds horizon " + std::to_string(horizon) + " s");
  }
  // Tolerate t_obs/dt landing a hair below an integer.
  steps_ = static_cast<std::size_t>(std::floor(t_obs / dt + 1e-9));
}

ScenarioRecord recompute_risk_indices(ScenarioRecord record) {
  const auto n_g = record.waveforms.rows();
  const auto n_t = record.waveforms.cols();
  record.eta_max_per_gauge.assign(static_cast<std::size_t>(n_g), 0.0);
  for (Eigen::Index g = 0; g < n_g; ++g) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index m = 0; m < n_t; ++m) {
      const double v = record.waveforms(g, m);
      if (!std::isfinite(v)) {
        throw DataError("non-finite sample in scenario " + std::to_string(record.scenario_id) + ", gauge " +
                        std::to_string(g) + ", step " + std::to_string(m));
      }
      best = std::max(best, v);
    }
    record.eta_max_per_gauge[static_cast<std::size_t>(g)] = n_t > 0 ? best : 0.0;
  }
  for (double d : record.inundation.depths) {
    if (!std::isfinite(d) || d < 0.0) {
      throw DataError("invalid inundation depth in scenario " + std::to_string(record.scenario_id));
    }
  }
  record.h_max = record.inundation.max_depth();
  return record;
}

GaugeSeries resample_series(std::span<const std::pair<double, double>> raw, double dt, double horizon, int gauge_id) {
  if (!(dt > 0.0)) throw ConfigError("resample: dt must be positive");
  if (!(horizon >= dt)) throw ConfigError("resample: horizon must be at least one sampling period");
  if (raw.size() < 2) throw InsufficientDataError("resample: need at least two raw samples");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i].first) || !std::isfinite(raw[i].second)) {
      throw DataError("resample: non-finite raw sample at index " + std::to_string(i));
    }
    if (i > 0 && !(raw[i].first > raw[i - 1].first)) {
      throw ArgumentError("resample: raw times must be strictly increasing");
    }
  }
  const double eps = 1e-9 * horizon;
  if (raw.front().first > dt + eps || raw.back().first < horizon - eps) {
    throw InsufficientDataError("resample: raw data covers [" + std::to_string(raw.front().first) + ", " +
                                std::to_string(raw.back().first) + "] s, shorter than the requested horizon of " +
                                std::to_string(horizon) + " s");
  }

  const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
  GaugeSeries out;
  out.gauge_id = gauge_id;
  out.dt = dt;
  out.samples.resize(n);
  std::size_t seg = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const double t = std::clamp(dt * static_cast<double>(m + 1), raw.front().first, raw.back().first);
    while (seg + 2 < raw.size() && raw[seg + 1].first <= t) ++seg;
    const auto& [t0, v0] = raw[seg];
    const auto& [t1, v1] = raw[seg + 1];
    if (t == t0) {
      out.samples[m] = v0;
    } else if (t == t1) {
      out.samples[m] = v1;
    } else {
      out.samples[m] = v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }
  }
  return out;
}

}  // namespace tsudetect
