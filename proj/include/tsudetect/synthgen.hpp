#pragma once
// Synthetic scenario database generator.
//
// Each scenario draws a random source: a lognormal magnitude, K wave packets
// with lognormal amplitudes, lateral centers and lags, and a correlation
// length controlling how wide a stretch of gauges each packet reaches. Gauge
// waveforms are sums of Gaussian-windowed sinusoids arriving later at higher
// gauge indices. The last gauge is the nearest-shore one; its peak height
// drives an inundation surrogate over a fixed topography ramp.

#include "tsudetect/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tsudetect::synth {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct GenConfig {
  std::size_t n_scenarios = 200;
  std::size_t n_gauges = 16;
  std::size_t n_steps = 720;
  double dt = 5.0;
  std::uint64_t seed = 42;
  std::size_t n_modes = 8;  // K wave packets per scenario

  // Amplitudes: scenario magnitude ~ median * exp(sigma * z), each packet
  // additionally scaled by exp(packet_log_sigma * z_k).
  double magnitude_median = 1.0;
  double magnitude_log_sigma = 0.6;
  double packet_log_sigma = 0.5;

  Range correlation_length_km{2.0, 4.0};
  double gauge_spacing_km = 2.0;
  double source_margin_km = 4.0;  // packet centers extend past both gauge-line ends
  Range speed_mps{75.0, 125.0};
  Range onset_s{10.0, 60.0};
  double packet_lag_max_s = 90.0;
  Range width_s{25.0, 50.0};   // Gaussian window standard deviation
  Range period_s{60.0, 150.0};
  double decay_max = 0.05;     // per-gauge attenuation rate upper bound

  std::size_t grid_nx = 54;
  std::size_t grid_ny = 45;
  double inundation_scale = 1.5;
  double topography_max_m = 3.0;

  // Throws ConfigError on invalid or degenerate values.
  void validate() const;
};

// One scenario's random source description.
struct SourceField {
  std::vector<double> mode_weights;  // K standard-normal draws scaling packet amplitudes
  double correlation_length_km = 1.0;
  double magnitude_scale = 1.0;
};

// Fixed topography ramp used by the inundation surrogate.
[[nodiscard]] double topography(const GenConfig& cfg, std::size_t ix, std::size_t iy);

// Inundation grid from the near-shore peak height E: s * max(0, E - d(x, y)).
[[nodiscard]] InundationGrid inundation_surrogate(const GenConfig& cfg, double nearshore_peak);

[[nodiscard]] ScenarioRecord generate_scenario(const GenConfig& cfg, std::size_t index);
[[nodiscard]] ScenarioDatabase generate_database(const GenConfig& cfg);

}  // namespace tsudetect::synth
