#pragma once
// Cross-validated evaluation of the three estimators over a set of
// observation windows.

#include "tsudetect/detect.hpp"
#include "tsudetect/metrics.hpp"
#include "tsudetect/pod.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tsudetect::harness {

struct PeakOptions {
  double prominence = 0.05;  // meters
  double min_height = 0.01;  // meters
};

struct ArrivalInfo {
  double t_arrv = 0.0;
  double peak_height = 0.0;
  std::size_t index = 0;
};

// First local maximum with height >= min_height and topographic prominence
// >= prominence. Plateaus count as one peak at their middle sample; maxima
// touching either end of the series are not peaks.
[[nodiscard]] std::optional<ArrivalInfo> detect_arrival(const GaugeSeries& series, const PeakOptions& opts = {});

// Keeps scenarios whose peak at `gauge` is >= threshold, preserving order.
[[nodiscard]] ScenarioDatabase filter_scenarios(const ScenarioDatabase& db, double threshold, std::size_t gauge);

struct Fold {
  std::vector<std::size_t> train;  // positions into the database
  std::vector<std::size_t> test;
};

[[nodiscard]] std::vector<Fold> kfold_split(std::size_t n_scenarios, std::size_t k, std::uint64_t seed);

inline const std::vector<double> kDefaultWindows = {60, 120, 180, 240, 300, 360, 480, 600, 720, 900};

struct SweepConfig {
  std::vector<double> windows = kDefaultWindows;  // seconds
  std::size_t folds = 5;
  std::uint64_t seed = 7;
  std::vector<detect::Method> methods = {detect::Method::MostProbable, detect::Method::WeightedMean,
                                         detect::Method::ShortestDtw};
  std::optional<std::size_t> target_gauge;  // default: last (nearest-shore) gauge
  double amplitude_threshold = 0.01;
  bool full_history = false;  // adds a DTW row over the whole horizon
  pod::ModeRule mode_rule = pod::ContributionThreshold{0.9};
  double likelihood_scale = 0.1;
  bayes::CovariancePolicy covariance_policy = bayes::CovariancePolicy::Eigenvalues;
  double wet_threshold = metrics::kDefaultWetThreshold;
  double noise_sigma = 0.0;  // additive Gaussian noise on held-out observations
  dtw::MultiGaugeOptions dtw;
  PeakOptions peaks;
  std::size_t workers = 1;
  bool keep_grids = false;

  void validate(const ScenarioDatabase& db) const;
  [[nodiscard]] std::size_t target(const ScenarioDatabase& db) const {
    return target_gauge.value_or(db.n_gauges == 0 ? 0 : db.n_gauges - 1);
  }
};

struct SweepRow {
  std::size_t fold = 0;
  int scenario_id = 0;
  detect::Method method = detect::Method::MostProbable;
  double t_obs = 0.0;
  double eta_pred = 0.0;
  double eta_true = 0.0;
  double h_pred = 0.0;
  double h_true = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  metrics::BinaryCounts counts;
  std::optional<double> t_arrv;
  std::optional<int> chosen_id;
  std::string error;  // empty when the row succeeded
  std::optional<InundationGrid> predicted_grid;

  [[nodiscard]] bool ok() const { return error.empty(); }
};

struct FoldInfo {
  std::size_t fold = 0;
  std::vector<int> train_ids;
  std::vector<int> test_ids;
  std::size_t r = 0;
  std::uint64_t basis_input_hash = 0;  // hash of the training data matrix
};

struct BoxRow {
  detect::Method method = detect::Method::MostProbable;
  double t_obs = 0.0;
  metrics::BoxStats eta_error;
  metrics::BoxStats h_error;
  metrics::BoxStats tpr;
  metrics::BoxStats fpr;
};

struct SweepReport {
  std::size_t retained = 0;
  std::vector<FoldInfo> folds;
  std::vector<SweepRow> rows;
  std::vector<BoxRow> box;
};

// FNV-1a over ids and waveform bytes of the given scenarios.
[[nodiscard]] std::uint64_t hash_training_input(const ScenarioDatabase& train);

// Box statistics per (method, t_obs) over successful rows, in first-seen order.
[[nodiscard]] std::vector<BoxRow> aggregate(const std::vector<SweepRow>& rows);

// Filters, splits and evaluates.
[[nodiscard]] SweepReport run_sweep(const ScenarioDatabase& db, const SweepConfig& cfg);

// Evaluates explicit folds over an already-filtered database.
[[nodiscard]] SweepReport run_sweep_with_folds(const ScenarioDatabase& db, const SweepConfig& cfg,
                                               const std::vector<Fold>& folds);

}  // namespace tsudetect::harness
