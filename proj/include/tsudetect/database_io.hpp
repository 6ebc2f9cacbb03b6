#pragma once
// On-disk scenario database.
//
// A database directory contains `manifest.json` plus two binary files per
// scenario: `<stem>.waveforms.bin` (N_g x N_t) and `<stem>.inundation.bin`
// (nx x ny). Binary payloads are raw little-endian float64 in row-major order
// with no header. Risk indices are not stored; they are recomputed on load.

#include "tsudetect/core.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tsudetect::io {

inline constexpr int kManifestVersion = 1;

void write_database(const ScenarioDatabase& db, const std::filesystem::path& dir);
[[nodiscard]] ScenarioDatabase read_database(const std::filesystem::path& dir);

// Little-endian float64 helpers shared by all binary formats.
void write_f64_file(const std::filesystem::path& path, std::span<const double> values);
[[nodiscard]] std::vector<double> read_f64_file(const std::filesystem::path& path, std::size_t expected_count);

// Raw gauge records from a CSV with header `time,gauge_0,...,gauge_{N_g-1}`.
struct RawGaugeTable {
  std::vector<double> times;
  std::vector<std::vector<double>> gauges;  // gauges[g][i] pairs with times[i]
};

[[nodiscard]] RawGaugeTable read_gauge_csv(const std::filesystem::path& path);

// Resamples every gauge of a raw table onto the uniform grid t = dt..horizon.
[[nodiscard]] Matrix resample_table(const RawGaugeTable& table, double dt, double horizon);

// Reads an inundation grid CSV: nx lines of ny comma-separated depths.
[[nodiscard]] InundationGrid read_grid_csv(const std::filesystem::path& path);

// Builds one scenario from a gauge CSV and an inundation grid CSV.
[[nodiscard]] ScenarioRecord import_csv_scenario(int scenario_id, const std::filesystem::path& gauge_csv,
                                                 const std::filesystem::path& grid_csv, double dt, double horizon);

}  // namespace tsudetect::io
