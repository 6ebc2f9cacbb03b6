#include "tsudetect/database_io.hpp"

#include <json.hpp>

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tsudetect::io {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0x00000000000000FFull) << 56) | ((v & 0x000000000000FF00ull) << 40) |
        ((v & 0x0000000000FF0000ull) << 24) | ((v & 0x00000000FF000000ull) << 8) |
        ((v & 0x000000FF00000000ull) >> 8) | ((v & 0x0000FF0000000000ull) >> 24) |
        ((v & 0x00FF000000000000ull) >> 40) | ((v & 0xFF00000000000000ull) >> 56);
  }
  return v;
}

std::string scenario_stem(int id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scenario_%06d", id);
  return buf;
}

double parse_double(std::string_view text, const fs::path& path, std::size_t line) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

void write_f64_file(const fs::path& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  std::vector<std::uint64_t> buf(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) buf[i] = to_little_endian(std::bit_cast<std::uint64_t>(values[i]));
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(std::uint64_t)));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<double> read_f64_file(const fs::path& path, std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != expected_count * sizeof(double)) {
    throw IoError(path.string() + ": expected " + std::to_string(expected_count * sizeof(double)) + " bytes, found " +
                  std::to_string(bytes));
  }
  in.seekg(0);
  std::vector<std::uint64_t> buf(expected_count);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("read failed for " + path.string());
  std::vector<double> out(expected_count);
  for (std::size_t i = 0; i < expected_count; ++i) out[i] = std::bit_cast<double>(to_little_endian(buf[i]));
  return out;
}

void write_database(const ScenarioDatabase& db, const fs::path& dir) {
  db.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  json manifest;
  manifest["format_version"] = kManifestVersion;
  manifest["n_scenarios"] = db.size();
  manifest["n_gauges"] = db.n_gauges;
  manifest["n_steps"] = db.n_steps;
  manifest["dt"] = db.dt;
  manifest["grid"] = {{"nx", db.grid.nx},
                      {"ny", db.grid.ny},
                      {"origin_x", db.grid.origin_x},
                      {"origin_y", db.grid.origin_y},
                      {"spacing", db.grid.spacing},
                      {"label", db.grid.label}};
  json index = json::array();
  for (const auto& s : db.scenarios) {
    const std::string stem = scenario_stem(s.scenario_id);
    const std::string wave_name = stem + ".waveforms.bin";
    const std::string grid_name = stem + ".inundation.bin";
    // Eigen is column-major; transpose into a row-major buffer.
    std::vector<double> rows(db.n_gauges * db.n_steps);
    for (std::size_t g = 0; g < db.n_gauges; ++g)
      for (std::size_t m = 0; m < db.n_steps; ++m)
        rows[g * db.n_steps + m] = s.waveforms(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(m));
    write_f64_file(dir / wave_name, rows);
    write_f64_file(dir / grid_name, s.inundation.depths);
    index.push_back({{"id", s.scenario_id}, {"waveforms", wave_name}, {"inundation", grid_name}});
  }
  manifest["scenarios"] = std::move(index);

  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

ScenarioDatabase read_database(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("no manifest.json in " + dir.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
  }

  ScenarioDatabase db;
  try {
    const int version = manifest.at("format_version").get<int>();
    if (version != kManifestVersion) throw IoError("unsupported manifest version " + std::to_string(version));
    db.n_gauges = manifest.at("n_gauges").get<std::size_t>();
    db.n_steps = manifest.at("n_steps").get<std::size_t>();
    db.dt = manifest.at("dt").get<double>();
    const auto& grid = manifest.at("grid");
    db.grid.nx = grid.at("nx").get<std::size_t>();
    db.grid.ny = grid.at("ny").get<std::size_t>();
    db.grid.origin_x = grid.value("origin_x", 0.0);
    db.grid.origin_y = grid.value("origin_y", 0.0);
    db.grid.spacing = grid.value("spacing", 1.0);
    db.grid.label = grid.value("label", std::string());
    const auto& index = manifest.at("scenarios");
    if (index.size() != manifest.at("n_scenarios").get<std::size_t>()) {
      throw InconsistentDatabaseError("manifest scenario count does not match its index");
    }
    db.scenarios.reserve(index.size());
    for (const auto& entry : index) {
      ScenarioRecord rec;
      rec.scenario_id = entry.at("id").get<int>();
      const auto rows = read_f64_file(dir / entry.at("waveforms").get<std::string>(), db.n_gauges * db.n_steps);
      rec.waveforms.resize(static_cast<Eigen::Index>(db.n_gauges), static_cast<Eigen::Index>(db.n_steps));
      for (std::size_t g = 0; g < db.n_gauges; ++g)
        for (std::size_t m = 0; m < db.n_steps; ++m)
          rec.waveforms(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(m)) = rows[g * db.n_steps + m];
      rec.inundation = InundationGrid(db.grid.nx, db.grid.ny);
      rec.inundation.depths = read_f64_file(dir / entry.at("inundation").get<std::string>(), db.grid.nx * db.grid.ny);
      db.scenarios.push_back(recompute_risk_indices(std::move(rec)));
    }
  } catch (const json::exception& e) {
    throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
  }
  db.validate();
  return db;
}

RawGaugeTable read_gauge_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  const auto header = split_commas(line);
  if (header.size() < 2 || trim(header[0]) != "time") {
    throw IoError(path.string() + ": header must be time,gauge_0,...");
  }
  for (std::size_t g = 1; g < header.size(); ++g) {
    if (trim(header[g]) != "gauge_" + std::to_string(g - 1)) {
      throw IoError(path.string() + ": unexpected header column '" + trim(header[g]) + "'");
    }
  }
  RawGaugeTable table;
  table.gauges.resize(header.size() - 1);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                    " columns");
    }
    table.times.push_back(parse_double(cells[0], path, lineno));
    for (std::size_t g = 1; g < cells.size(); ++g) table.gauges[g - 1].push_back(parse_double(cells[g], path, lineno));
  }
  return table;
}

Matrix resample_table(const RawGaugeTable& table, double dt, double horizon) {
  const auto n_t = static_cast<Eigen::Index>(std::llround(horizon / dt));
  Matrix out(static_cast<Eigen::Index>(table.gauges.size()), n_t);
  std::vector<std::pair<double, double>> raw(table.times.size());
  for (std::size_t g = 0; g < table.gauges.size(); ++g) {
    for (std::size_t i = 0; i < table.times.size(); ++i) raw[i] = {table.times[i], table.gauges[g][i]};
    const auto series = resample_series(raw, dt, horizon, static_cast<int>(g));
    for (Eigen::Index m = 0; m < n_t; ++m) out(static_cast<Eigen::Index>(g), m) = series.samples[static_cast<std::size_t>(m)];
  }
  return out;
}

InundationGrid read_grid_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (auto cell : split_commas(line)) row.push_back(parse_double(cell, path, lineno));
    if (!rows.empty() && row.size() != rows.front().size()) throw IoError(path.string() + ": ragged grid rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path.string() + ": empty grid");
  InundationGrid grid(rows.size(), rows.front().size());
  for (std::size_t x = 0; x < grid.nx; ++x)
    for (std::size_t y = 0; y < grid.ny; ++y) grid.at(x, y) = rows[x][y];
  return grid;
}

ScenarioRecord import_csv_scenario(int scenario_id, const fs::path& gauge_csv, const fs::path& grid_csv, double dt,
                                   double horizon) {
  ScenarioRecord rec;
  rec.scenario_id = scenario_id;
  rec.waveforms = resample_table(read_gauge_csv(gauge_csv), dt, horizon);
  rec.inundation = read_grid_csv(grid_csv);
  return recompute_risk_indices(std::move(rec));
}

}  // namespace tsudetect::io
