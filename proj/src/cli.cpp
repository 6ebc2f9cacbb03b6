#include "tsudetect/cli.hpp"

#include "tsudetect/database_io.hpp"
#include "tsudetect/harness.hpp"
#include "tsudetect/report_io.hpp"
#include "tsudetect/synthgen.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace tsudetect::cli {
namespace fs = std::filesystem;

namespace {

struct ModeRuleFlags {
  std::size_t modes = 0;  // 0 = use theta
  double theta = 0.9;

  [[nodiscard]] pod::ModeRule rule() const {
    if (modes > 0) return pod::FixedModes{modes};
    return pod::ContributionThreshold{theta};
  }
};

void add_mode_rule(CLI::App* cmd, ModeRuleFlags& flags) {
  cmd->add_option("--modes", flags.modes, "Fixed number of POD modes (overrides --theta)");
  cmd->add_option("--theta", flags.theta, "Cumulative contribution threshold for choosing r")->check(CLI::Range(0.0, 1.0));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void echo_config(const CLI::App& app, const fs::path& dir) {
  std::ofstream out(dir / "effective_config.toml", std::ios::trunc);
  if (!out) throw IoError("cannot write effective config in " + dir.string());
  out << app.config_to_str(true, false);
}

std::size_t default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Sequential Bayesian tsunami scenario detection over a precomputed database"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.require_subcommand(1);

  // gen
  synth::GenConfig gen;
  fs::path gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic scenario database");
  gen_cmd->add_option("--out", gen_out, "Output database directory")->required();
  gen_cmd->add_option("--scenarios", gen.n_scenarios, "Number of scenarios")->capture_default_str();
  gen_cmd->add_option("--gauges", gen.n_gauges, "Number of gauges")->capture_default_str();
  gen_cmd->add_option("--steps", gen.n_steps, "Samples per gauge")->capture_default_str();
  gen_cmd->add_option("--dt", gen.dt, "Sampling period [s]")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Master RNG seed")->capture_default_str();
  gen_cmd->add_option("--packets", gen.n_modes, "Wave packets per scenario (K)")->capture_default_str();
  gen_cmd->add_option("--magnitude-median", gen.magnitude_median, "Median scenario magnitude [m]")->capture_default_str();
  gen_cmd->add_option("--magnitude-log-sigma", gen.magnitude_log_sigma)->capture_default_str();
  gen_cmd->add_option("--packet-log-sigma", gen.packet_log_sigma)->capture_default_str();
  gen_cmd->add_option("--corr-length-min", gen.correlation_length_km.lo, "[km]")->capture_default_str();
  gen_cmd->add_option("--corr-length-max", gen.correlation_length_km.hi, "[km]")->capture_default_str();
  gen_cmd->add_option("--gauge-spacing", gen.gauge_spacing_km, "[km]")->capture_default_str();
  gen_cmd->add_option("--source-margin", gen.source_margin_km, "[km]")->capture_default_str();
  gen_cmd->add_option("--speed-min", gen.speed_mps.lo, "[m/s]")->capture_default_str();
  gen_cmd->add_option("--speed-max", gen.speed_mps.hi, "[m/s]")->capture_default_str();
  gen_cmd->add_option("--onset-min", gen.onset_s.lo, "[s]")->capture_default_str();
  gen_cmd->add_option("--onset-max", gen.onset_s.hi, "[s]")->capture_default_str();
  gen_cmd->add_option("--lag-max", gen.packet_lag_max_s, "[s]")->capture_default_str();
  gen_cmd->add_option("--width-min", gen.width_s.lo, "[s]")->capture_default_str();
  gen_cmd->add_option("--width-max", gen.width_s.hi, "[s]")->capture_default_str();
  gen_cmd->add_option("--period-min", gen.period_s.lo, "[s]")->capture_default_str();
  gen_cmd->add_option("--period-max", gen.period_s.hi, "[s]")->capture_default_str();
  gen_cmd->add_option("--decay-max", gen.decay_max)->capture_default_str();
  gen_cmd->add_option("--nx", gen.grid_nx)->capture_default_str();
  gen_cmd->add_option("--ny", gen.grid_ny)->capture_default_str();
  gen_cmd->add_option("--inundation-scale", gen.inundation_scale)->capture_default_str();
  gen_cmd->add_option("--topography-max", gen.topography_max_m, "[m]")->capture_default_str();

  // decompose
  fs::path dec_db, dec_out;
  ModeRuleFlags dec_rule;
  auto* dec_cmd = app.add_subcommand("decompose", "Compute the POD basis and coefficient matrices");
  dec_cmd->add_option("--db", dec_db, "Database directory")->required();
  dec_cmd->add_option("--out", dec_out, "Output directory")->required();
  add_mode_rule(dec_cmd, dec_rule);

  // detect
  fs::path det_db, det_basis, det_observed, det_out;
  std::string det_method = "most-probable";
  double det_t_obs = 480.0;
  double det_scale = 0.1;
  int det_target = -1;
  std::size_t det_band = 0;
  bool det_log = false;
  ModeRuleFlags det_rule;
  auto* det_cmd = app.add_subcommand("detect", "Predict risk indices for one observed event");
  det_cmd->add_option("--db", det_db, "Database directory")->required();
  det_cmd->add_option("--basis", det_basis, "basis.bin from `decompose` (computed from --db when omitted)");
  det_cmd->add_option("--observed", det_observed, "Observed waveform CSV (time,gauge_0,...)")->required();
  det_cmd->add_option("--method", det_method)
      ->check(CLI::IsMember({"most-probable", "weighted-mean", "shortest-dtw"}))
      ->capture_default_str();
  det_cmd->add_option("--t-obs", det_t_obs, "Observation window [s]")->capture_default_str();
  det_cmd->add_option("--scale", det_scale, "Likelihood covariance scale")->capture_default_str();
  det_cmd->add_option("--target-gauge", det_target, "Target gauge index (default: last)");
  det_cmd->add_option("--dtw-band", det_band, "Sakoe-Chiba half-width (0 = exact)");
  det_cmd->add_flag("--posterior-log", det_log, "Write posterior.csv with per-step probabilities");
  det_cmd->add_option("--out", det_out, "Output directory")->required();
  add_mode_rule(det_cmd, det_rule);

  // sweep
  fs::path sw_db, sw_out;
  harness::SweepConfig sw;
  std::vector<std::string> sw_methods = {"most-probable", "weighted-mean", "shortest-dtw"};
  int sw_target = -1;
  std::size_t sw_band = 0;
  std::string sw_agg = "sum";
  ModeRuleFlags sw_rule;
  sw.workers = default_workers();
  auto* sw_cmd = app.add_subcommand("sweep", "k-fold cross-validated evaluation over observation windows");
  sw_cmd->add_option("--db", sw_db, "Database directory")->required();
  sw_cmd->add_option("--out", sw_out, "Output directory")->required();
  sw_cmd->add_option("--windows", sw.windows, "Observation windows [s]")->delimiter(',')->capture_default_str();
  sw_cmd->add_option("--folds", sw.folds)->capture_default_str();
  sw_cmd->add_option("--seed", sw.seed, "Split and noise seed")->capture_default_str();
  sw_cmd->add_option("--methods", sw_methods)
      ->delimiter(',')
      ->check(CLI::IsMember({"most-probable", "weighted-mean", "shortest-dtw"}))
      ->capture_default_str();
  sw_cmd->add_option("--target-gauge", sw_target, "Target gauge index (default: last)");
  sw_cmd->add_option("--threshold", sw.amplitude_threshold, "Minimum target-gauge peak [m]")->capture_default_str();
  sw_cmd->add_flag("--full-history", sw.full_history, "Add a DTW row over the full horizon");
  sw_cmd->add_option("--scale", sw.likelihood_scale, "Likelihood covariance scale")->capture_default_str();
  sw_cmd->add_option("--wet-threshold", sw.wet_threshold, "[m]")->capture_default_str();
  sw_cmd->add_option("--noise", sw.noise_sigma, "Observation noise sigma [m]")->capture_default_str();
  sw_cmd->add_option("--dtw-band", sw_band, "Sakoe-Chiba half-width (0 = exact)");
  sw_cmd->add_option("--dtw-aggregation", sw_agg)->check(CLI::IsMember({"sum", "mean"}))->capture_default_str();
  sw_cmd->add_option("--prominence", sw.peaks.prominence, "[m]")->capture_default_str();
  sw_cmd->add_option("--min-height", sw.peaks.min_height, "[m]")->capture_default_str();
  sw_cmd->add_option("--workers", sw.workers, "Worker threads")->envname("TSUDETECT_WORKERS")->capture_default_str();
  sw_cmd->add_flag("--keep-grids", sw.keep_grids, "Write every predicted inundation grid");
  add_mode_rule(sw_cmd, sw_rule);

  // report
  fs::path rep_in, rep_out;
  auto* rep_cmd = app.add_subcommand("report", "Turn report.csv into scatter and box-statistic tables");
  rep_cmd->add_option("--report", rep_in, "report.csv from `sweep`")->required();
  rep_cmd->add_option("--out", rep_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen_cmd) {
      const auto db = synth::generate_database(gen);
      io::write_database(db, gen_out);
      echo_config(app, gen_out);
      std::cout << "wrote " << db.size() << " scenarios to " << gen_out << '\n';
    } else if (*dec_cmd) {
      const auto db = io::read_database(dec_db);
      const auto basis = pod::compute_basis(pod::assemble_matrix(db), dec_rule.rule());
      ensure_dir(dec_out);
      io::write_basis(basis, dec_out / "basis.bin");
      io::write_coefficients(pod::extract_coefficients(basis, db), dec_out / "coeffs.bin");
      io::write_contribution_csv(basis, dec_out / "contribution.csv");
      echo_config(app, dec_out);
      std::cout << "r = " << basis.r << " of " << basis.n_gauges() << " modes, c(r) = " << basis.contribution[basis.r - 1]
                << '\n';
    } else if (*det_cmd) {
      const auto db = io::read_database(det_db);
      const std::size_t target = det_target < 0 ? db.n_gauges - 1 : static_cast<std::size_t>(det_target);
      const ObservationWindow window(det_t_obs, db.dt, db.horizon());
      if (window.step_count() == 0) throw ConfigError("observation window shorter than one sampling period");
      const auto table = io::read_gauge_csv(det_observed);
      if (table.gauges.size() != db.n_gauges) {
        throw InconsistentDatabaseError("observed file has " + std::to_string(table.gauges.size()) +
                                        " gauges, database has " + std::to_string(db.n_gauges));
      }
      const Matrix observed = io::resample_table(table, db.dt, db.dt * static_cast<double>(window.step_count()));
      const auto method = detect::parse_method(det_method);
      detect::Prediction pred;
      ensure_dir(det_out);
      if (method == detect::Method::ShortestDtw) {
        dtw::MultiGaugeOptions opts;
        if (det_band > 0) opts.band = det_band;
        pred = detect::shortest_dtw(db, observed, window, target, opts);
      } else {
        const auto basis = det_basis.empty() ? pod::compute_basis(pod::assemble_matrix(db), det_rule.rule())
                                             : io::read_basis(det_basis);
        const auto coeffs = pod::extract_coefficients(basis, db, window.step_count());
        const auto model = bayes::LikelihoodModel::from_basis(basis, det_scale);
        const auto posterior = bayes::run_sequence(coeffs, basis, observed, window.step_count(), model,
                                                   bayes::uniform_prior(db.size(), det_log));
        if (det_log) io::write_posterior_log(posterior, coeffs.scenario_ids, det_out / "posterior.csv");
        pred = method == detect::Method::MostProbable ? detect::most_probable(posterior, db, target, det_t_obs)
                                                      : detect::weighted_mean(posterior, db, target, det_t_obs);
      }
      io::write_prediction_json(pred, det_out / "prediction.json");
      io::write_f64_file(det_out / "inundation.bin", pred.inundation.depths);
      echo_config(app, det_out);
      std::cout << detect::method_name(pred.method) << ": eta_max = " << pred.eta_max << " m, H_max = " << pred.h_max
                << " m\n";
    } else if (*sw_cmd) {
      const auto db = io::read_database(sw_db);
      sw.methods.clear();
      for (const auto& m : sw_methods) sw.methods.push_back(detect::parse_method(m));
      if (sw_target >= 0) sw.target_gauge = static_cast<std::size_t>(sw_target);
      if (sw_band > 0) sw.dtw.band = sw_band;
      sw.dtw.aggregation = sw_agg == "mean" ? dtw::GaugeAggregation::Mean : dtw::GaugeAggregation::Sum;
      sw.mode_rule = sw_rule.rule();
      const auto report = harness::run_sweep(db, sw);
      ensure_dir(sw_out);
      io::write_report_csv(report.rows, sw_out / "report.csv");
      io::write_boxstats_csv(report.box, sw_out / "boxstats.csv");
      io::write_folds_csv(report.folds, sw_out / "folds.csv");
      if (sw.keep_grids) {
        ensure_dir(sw_out / "grids");
        for (const auto& row : report.rows) {
          if (!row.predicted_grid) continue;
          const std::string name = "fold" + std::to_string(row.fold) + "_s" + std::to_string(row.scenario_id) + "_" +
                                   std::string(detect::method_name(row.method)) + "_t" + io::format_number(row.t_obs) +
                                   ".bin";
          io::write_f64_file(sw_out / "grids" / name, row.predicted_grid->depths);
        }
      }
      echo_config(app, sw_out);
      std::size_t failed = 0;
      for (const auto& row : report.rows) failed += row.ok() ? 0 : 1;
      std::cout << report.rows.size() << " rows (" << failed << " failed) over " << report.retained
                << " retained scenarios\n";
    } else if (*rep_cmd) {
      const auto rows = io::read_report_csv(rep_in);
      ensure_dir(rep_out);
      io::write_scatter_csv(rows, io::ScatterQuantity::Eta, rep_out / "scatter_eta.csv");
      io::write_scatter_csv(rows, io::ScatterQuantity::Hmax, rep_out / "scatter_hmax.csv");
      io::write_boxstats_csv(harness::aggregate(rows), rep_out / "boxstats.csv");
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("tsudetect");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(storage.size()), argv.data());
}

}  // namespace tsudetect::cli
