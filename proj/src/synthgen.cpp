#include "tsudetect/synthgen.hpp"

#include "tsudetect/random.hpp"

#include <cmath>
#include <numbers>

namespace tsudetect::synth {
namespace {

void check_range(const Range& r, const char* name, bool allow_zero) {
  const bool ok = std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi && (allow_zero ? r.lo >= 0.0 : r.lo > 0.0);
  if (!ok) throw ConfigError(std::string("gen: invalid range for ") + name);
}

struct Packet {
  double amplitude;
  double center_km;
  double lag_s;
  double width_s;
  double period_s;
  double decay;
};

}  // namespace

void GenConfig::validate() const {
  if (n_scenarios == 0 || n_gauges == 0 || n_steps == 0 || n_modes == 0 || grid_nx == 0 || grid_ny == 0) {
    throw ConfigError("gen: all counts must be at least 1");
  }
  if (!(dt > 0.0)) throw ConfigError("gen: dt must be positive");
  if (!(magnitude_median > 0.0)) throw ConfigError("gen: magnitude median must be positive");
  if (magnitude_log_sigma < 0.0 || packet_log_sigma < 0.0) throw ConfigError("gen: log sigmas must be non-negative");
  check_range(correlation_length_km, "correlation length", false);
  check_range(speed_mps, "propagation speed", false);
  check_range(onset_s, "onset", true);
  check_range(period_s, "period", false);
  // A zero-variance window collapses every packet to a single sample.
  if (!(width_s.lo > 0.0)) throw ConfigError("gen: degenerate packet window (zero variance)");
  check_range(width_s, "packet width", false);
  if (gauge_spacing_km < 0.0 || source_margin_km < 0.0 || packet_lag_max_s < 0.0 || decay_max < 0.0) {
    throw ConfigError("gen: spacing, margin, lag and decay must be non-negative");
  }
  if (!(inundation_scale > 0.0) || topography_max_m < 0.0) throw ConfigError("gen: invalid inundation surrogate");
}

double topography(const GenConfig& cfg, std::size_t ix, std::size_t iy) {
  const double fx = cfg.grid_nx > 1 ? static_cast<double>(ix) / static_cast<double>(cfg.grid_nx - 1) : 0.0;
  const double fy = cfg.grid_ny > 1 ? static_cast<double>(iy) / static_cast<double>(cfg.grid_ny - 1) : 0.0;
  // Rises inland along x; a shallow ridge across y breaks the symmetry.
  return cfg.topography_max_m * fx * (0.75 + 0.25 * std::sin(std::numbers::pi * fy));
}

InundationGrid inundation_surrogate(const GenConfig& cfg, double nearshore_peak) {
  InundationGrid grid(cfg.grid_nx, cfg.grid_ny);
  for (std::size_t x = 0; x < cfg.grid_nx; ++x)
    for (std::size_t y = 0; y < cfg.grid_ny; ++y)
      grid.at(x, y) = cfg.inundation_scale * std::max(0.0, nearshore_peak - topography(cfg, x, y));
  return grid;
}

ScenarioRecord generate_scenario(const GenConfig& cfg, std::size_t index) {
  Rng rng(derive_seed(cfg.seed, index));

  SourceField source;
  source.magnitude_scale = cfg.magnitude_median * std::exp(cfg.magnitude_log_sigma * rng.normal());
  source.correlation_length_km = rng.uniform(cfg.correlation_length_km.lo, cfg.correlation_length_km.hi);
  const double speed = rng.uniform(cfg.speed_mps.lo, cfg.speed_mps.hi);
  const double onset = rng.uniform(cfg.onset_s.lo, cfg.onset_s.hi);

  const double line_km = cfg.gauge_spacing_km * static_cast<double>(cfg.n_gauges - 1);
  std::vector<Packet> packets(cfg.n_modes);
  source.mode_weights.resize(cfg.n_modes);
  for (std::size_t k = 0; k < cfg.n_modes; ++k) {
    source.mode_weights[k] = rng.normal();
    Packet& p = packets[k];
    p.amplitude = source.magnitude_scale * std::exp(cfg.packet_log_sigma * source.mode_weights[k]);
    p.center_km = rng.uniform(-cfg.source_margin_km, line_km + cfg.source_margin_km);
    p.lag_s = rng.uniform(0.0, cfg.packet_lag_max_s);
    p.width_s = rng.uniform(cfg.width_s.lo, cfg.width_s.hi);
    p.period_s = rng.uniform(cfg.period_s.lo, cfg.period_s.hi);
    p.decay = rng.uniform(0.0, cfg.decay_max);
  }

  ScenarioRecord rec;
  rec.scenario_id = static_cast<int>(index);
  rec.waveforms = Matrix::Zero(static_cast<Eigen::Index>(cfg.n_gauges), static_cast<Eigen::Index>(cfg.n_steps));
  for (std::size_t g = 0; g < cfg.n_gauges; ++g) {
    const double position_km = cfg.gauge_spacing_km * static_cast<double>(g);
    const double travel_s = position_km * 1000.0 / speed;
    for (const auto& p : packets) {
      const double offset = (position_km - p.center_km) / source.correlation_length_km;
      const double gain = p.amplitude * std::exp(-0.5 * offset * offset) * std::exp(-p.decay * static_cast<double>(g));
      const double arrival = onset + p.lag_s + travel_s;
      for (std::size_t m = 0; m < cfg.n_steps; ++m) {
        const double tau = cfg.dt * static_cast<double>(m + 1) - arrival;
        const double z = tau / p.width_s;
        if (std::abs(z) > 8.0) continue;
        rec.waveforms(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(m)) +=
            gain * std::exp(-0.5 * z * z) * std::cos(2.0 * std::numbers::pi * tau / p.period_s);
      }
    }
  }

  const double nearshore_peak = rec.waveforms.row(static_cast<Eigen::Index>(cfg.n_gauges - 1)).maxCoeff();
  rec.inundation = inundation_surrogate(cfg, nearshore_peak);
  return recompute_risk_indices(std::move(rec));
}

ScenarioDatabase generate_database(const GenConfig& cfg) {
  cfg.validate();
  ScenarioDatabase db;
  db.n_gauges = cfg.n_gauges;
  db.n_steps = cfg.n_steps;
  db.dt = cfg.dt;
  db.grid.nx = cfg.grid_nx;
  db.grid.ny = cfg.grid_ny;
  db.grid.spacing = 1.0;
  db.grid.label = "synthetic";
  db.scenarios.reserve(cfg.n_scenarios);
  for (std::size_t j = 0; j < cfg.n_scenarios; ++j) db.scenarios.push_back(generate_scenario(cfg, j));
  db.validate();
  return db;
}

}  // namespace tsudetect::synth
