#include "tsudetect/harness.hpp"
#include "tsudetect/random.hpp"
#include "tsudetect/synthgen.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace tsudetect;

namespace {

GaugeSeries series_from(const std::vector<double>& v, double dt = 5.0) {
  GaugeSeries s;
  s.dt = dt;
  s.samples = v;
  return s;
}

GaugeSeries pulses(std::initializer_list<std::pair<double, double>> centers_heights, std::size_t n = 200) {
  GaugeSeries s;
  s.dt = 5.0;
  s.samples.assign(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    const double t = s.time_at(m);
    for (const auto& [c, h] : centers_heights) s.samples[m] += h * std::exp(-0.5 * std::pow((t - c) / 30.0, 2));
  }
  return s;
}

ScenarioDatabase noise_database(std::size_t n, std::size_t gauges, std::size_t steps, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ScenarioRecord> recs;
  for (std::size_t j = 0; j < n; ++j) {
    Matrix w(static_cast<Eigen::Index>(gauges), static_cast<Eigen::Index>(steps));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
    InundationGrid g(3, 2);
    for (auto& d : g.depths) d = rng.uniform(0.0, 2.0);
    recs.push_back(fixtures::make_record(static_cast<int>(j), w, g));
  }
  return fixtures::make_database(std::move(recs));
}

harness::SweepConfig toy_sweep_config() {
  harness::SweepConfig cfg;
  cfg.windows = {15, 60, 120, 240, 360};
  cfg.amplitude_threshold = 0.0;
  return cfg;
}

}  // namespace

TEST(Arrival, RampThenPlateauHasNoPeak) {
  EXPECT_FALSE(harness::detect_arrival(series_from({0, 0.2, 0.4, 0.6, 0.8, 1, 1, 1, 1})).has_value());
  EXPECT_FALSE(harness::detect_arrival(series_from({2, 1, 0.5, 0.2, 0.1})).has_value());
  EXPECT_FALSE(harness::detect_arrival(series_from({})).has_value());
}

TEST(Arrival, SinglePulse) {
  const auto a = harness::detect_arrival(pulses({{300.0, 1.0}}));
  ASSERT_TRUE(a.has_value());
  EXPECT_NEAR(a->t_arrv, 300.0, 5.0);
  EXPECT_NEAR(a->peak_height, 1.0, 1e-9);
}

TEST(Arrival, FirstOfTwoPulsesEvenWhenSecondIsTaller) {
  const auto s = pulses({{200.0, 0.5}, {600.0, 1.2}});
  const auto a = harness::detect_arrival(s);
  ASSERT_TRUE(a.has_value());
  EXPECT_NEAR(a->t_arrv, 200.0, 5.0);
  EXPECT_NEAR(a->peak_height, 0.5, 1e-6);
  EXPECT_EQ(a->peak_height, s.samples[a->index]);
}

TEST(Arrival, SmallOrShallowPeaksIgnored) {
  // A ripple below the prominence floor precedes the real peak.
  auto s = pulses({{500.0, 1.0}});
  s.samples[20] += 0.02;
  const auto a = harness::detect_arrival(s);
  ASSERT_TRUE(a.has_value());
  EXPECT_NEAR(a->t_arrv, 500.0, 5.0);
  EXPECT_FALSE(harness::detect_arrival(pulses({{300.0, 0.008}})).has_value());
}

TEST(Arrival, PlateauReportsMiddleSample) {
  const auto a = harness::detect_arrival(series_from({0, 0.5, 1, 1, 1, 0.5, 0}));
  ASSERT_TRUE(a.has_value());
  EXPECT_EQ(a->index, 3u);
  EXPECT_DOUBLE_EQ(a->t_arrv, 20.0);
}

TEST(Filter, ThresholdZeroIsIdentityOnNonNegativePeaks) {
  const auto db = fixtures::toy_database(10);
  const auto kept = harness::filter_scenarios(db, 0.0, db.n_gauges - 1);
  EXPECT_EQ(kept.size(), db.size());
}

TEST(Filter, DefaultSyntheticRetainedCount) {
  const auto db = synth::generate_database(synth::GenConfig{});
  const auto kept = harness::filter_scenarios(db, 0.01, db.n_gauges - 1);
  EXPECT_EQ(kept.size(), 190u);  // frozen regression value
  for (const auto& s : kept.scenarios) EXPECT_GE(s.eta_max_per_gauge.back(), 0.01);
  for (std::size_t i = 1; i < kept.size(); ++i) EXPECT_LT(kept.scenarios[i - 1].scenario_id, kept.scenarios[i].scenario_id);
}

TEST(Filter, AllSmallIsAnError) {
  const auto db = fixtures::make_database({fixtures::make_record(0, Matrix::Constant(2, 5, 0.001), InundationGrid(1, 1))});
  EXPECT_THROW((void)harness::filter_scenarios(db, 0.01, 1), ConfigError);
  EXPECT_THROW((void)harness::filter_scenarios(db, 0.0, 2), ConfigError);
}

TEST(KFold, TenIntoFive) {
  const auto folds = harness::kfold_split(10, 5, 7);
  ASSERT_EQ(folds.size(), 5u);
  std::set<std::size_t> seen;
  for (const auto& f : folds) {
    EXPECT_EQ(f.test.size(), 2u);
    EXPECT_EQ(f.train.size(), 8u);
    for (auto t : f.test) EXPECT_TRUE(seen.insert(t).second);
    std::set<std::size_t> all(f.train.begin(), f.train.end());
    for (auto t : f.test) EXPECT_TRUE(all.insert(t).second);
    EXPECT_EQ(all.size(), 10u);
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(KFold, LargeDatabaseSizes) {
  const auto folds = harness::kfold_split(1771, 5, 7);
  std::size_t total = 0;
  for (const auto& f : folds) {
    EXPECT_TRUE(f.test.size() == 354u || f.test.size() == 355u);
    EXPECT_EQ(f.train.size() + f.test.size(), 1771u);
    total += f.test.size();
  }
  EXPECT_EQ(total, 1771u);
  EXPECT_EQ(std::count_if(folds.begin(), folds.end(), [](const auto& f) { return f.test.size() == 354u; }), 4);
}

TEST(KFold, DeterministicPerSeed) {
  const auto a = harness::kfold_split(50, 5, 3);
  const auto b = harness::kfold_split(50, 5, 3);
  const auto c = harness::kfold_split(50, 5, 4);
  bool differs = false;
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_EQ(a[f].test, b[f].test);
    differs = differs || a[f].test != c[f].test;
  }
  EXPECT_TRUE(differs);
}

TEST(KFold, Errors) {
  EXPECT_THROW((void)harness::kfold_split(4, 5, 1), ConfigError);
  EXPECT_THROW((void)harness::kfold_split(4, 1, 1), ConfigError);
}

TEST(Sweep, DuplicatedTestScenariosGiveZeroError) {
  const auto base = fixtures::toy_database(12);
  std::vector<ScenarioRecord> recs = base.scenarios;
  for (const auto& s : base.scenarios) {
    auto copy = s;
    copy.scenario_id += 100;
    recs.push_back(std::move(copy));
  }
  const auto db = fixtures::make_database(std::move(recs));
  std::vector<std::size_t> originals(12), copies(12);
  std::iota(originals.begin(), originals.end(), 0);
  std::iota(copies.begin(), copies.end(), 12);
  const std::vector<harness::Fold> folds = {{originals, copies}, {copies, originals}};

  auto cfg = toy_sweep_config();
  cfg.methods = {detect::Method::MostProbable};
  const auto report = harness::run_sweep_with_folds(db, cfg, folds);
  ASSERT_EQ(report.rows.size(), 2u * 12u * cfg.windows.size());
  for (const auto& row : report.rows) {
    ASSERT_TRUE(row.ok()) << row.error;
    EXPECT_EQ(row.eta_pred, row.eta_true);
    EXPECT_EQ(row.h_pred, row.h_true);
    EXPECT_EQ(row.counts.fp + row.counts.fn, 0u);
    EXPECT_EQ(std::abs(*row.chosen_id - row.scenario_id), 100);
  }
}

TEST(Sweep, RowCountArithmetic) {
  const auto db = noise_database(200, 2, 12, 1);
  harness::SweepConfig cfg;
  cfg.windows = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
  cfg.amplitude_threshold = 0.0;
  cfg.target_gauge = 0;
  const auto folds = harness::kfold_split(db.size(), 5, cfg.seed);
  const auto report = harness::run_sweep_with_folds(db, cfg, folds);
  EXPECT_EQ(report.rows.size(), 5u * 40u * 3u * 10u);
  EXPECT_EQ(report.rows.size(), 6000u);
  EXPECT_EQ(report.box.size(), 3u * 10u);
  for (const auto& f : report.folds) EXPECT_EQ(f.test_ids.size(), 40u);
}

TEST(Sweep, FullHistoryAddsOneDtwRowPerScenario) {
  const auto db = fixtures::toy_database(10);
  auto cfg = toy_sweep_config();
  cfg.windows = {60, 120};
  cfg.folds = 2;
  const auto plain = harness::run_sweep(db, cfg);
  cfg.full_history = true;
  const auto full = harness::run_sweep(db, cfg);
  EXPECT_EQ(full.rows.size(), plain.rows.size() + 10u);
  const auto n_full = std::count_if(full.rows.begin(), full.rows.end(), [&](const auto& r) {
    return r.method == detect::Method::ShortestDtw && r.t_obs == db.horizon();
  });
  EXPECT_EQ(n_full, 10);
}

TEST(Sweep, DeterministicAcrossRunsAndWorkerCounts) {
  const auto db = fixtures::toy_database(15);
  auto cfg = toy_sweep_config();
  cfg.folds = 3;
  cfg.noise_sigma = 0.05;
  const auto a = harness::run_sweep(db, cfg);
  cfg.workers = 3;
  const auto b = harness::run_sweep(db, cfg);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    EXPECT_EQ(x.scenario_id, y.scenario_id);
    EXPECT_EQ(x.method, y.method);
    EXPECT_EQ(x.t_obs, y.t_obs);
    EXPECT_EQ(x.eta_pred, y.eta_pred);
    EXPECT_EQ(x.h_pred, y.h_pred);
    EXPECT_EQ(x.counts, y.counts);
    EXPECT_EQ(x.chosen_id, y.chosen_id);
  }
}

TEST(Sweep, BasisDependsOnlyOnTrainingFold) {
  const auto db = fixtures::toy_database(15);
  auto cfg = toy_sweep_config();
  cfg.folds = 3;
  const auto folds = harness::kfold_split(db.size(), 3, cfg.seed);
  const auto a = harness::run_sweep_with_folds(db, cfg, folds);

  // Perturb every test scenario of fold 0; its training hash must not move.
  auto changed = db;
  for (std::size_t p : folds[0].test) changed.scenarios[p].waveforms.array() += 0.3;
  const auto b = harness::run_sweep_with_folds(changed, cfg, folds);
  EXPECT_EQ(a.folds[0].basis_input_hash, b.folds[0].basis_input_hash);
  EXPECT_EQ(a.folds[0].r, b.folds[0].r);
  EXPECT_NE(a.folds[1].basis_input_hash, b.folds[1].basis_input_hash);
  EXPECT_EQ(a.folds[0].basis_input_hash, harness::hash_training_input(db.subset(folds[0].train)));
}

TEST(Sweep, ChosenScenariosBelongToTrainingFold) {
  const auto db = fixtures::toy_database(15);
  auto cfg = toy_sweep_config();
  cfg.folds = 3;
  cfg.noise_sigma = 0.1;
  const auto report = harness::run_sweep(db, cfg);
  for (const auto& row : report.rows) {
    ASSERT_TRUE(row.ok());
    if (row.method == detect::Method::WeightedMean) {
      EXPECT_FALSE(row.chosen_id.has_value());
      continue;
    }
    const auto& train = report.folds[row.fold].train_ids;
    ASSERT_TRUE(row.chosen_id.has_value());
    EXPECT_NE(std::find(train.begin(), train.end(), *row.chosen_id), train.end());
    const auto& test = report.folds[row.fold].test_ids;
    EXPECT_NE(std::find(test.begin(), test.end(), row.scenario_id), test.end());
  }
}

TEST(Sweep, ArrivalTimesComeFromTargetGauge) {
  const auto db = fixtures::toy_database(10);
  auto cfg = toy_sweep_config();
  cfg.folds = 2;
  const auto report = harness::run_sweep(db, cfg);
  for (const auto& row : report.rows) {
    const auto it = std::find_if(db.scenarios.begin(), db.scenarios.end(),
                                 [&](const auto& s) { return s.scenario_id == row.scenario_id; });
    const auto a = harness::detect_arrival(it->gauge(db.n_gauges - 1, db.dt));
    ASSERT_EQ(row.t_arrv.has_value(), a.has_value());
    if (a) EXPECT_EQ(*row.t_arrv, a->t_arrv);
  }
}

TEST(Sweep, LongerWindowsHelpOnDefaultDatabase) {
  const auto db = synth::generate_database(synth::GenConfig{});
  harness::SweepConfig cfg;
  cfg.windows = {60, 900};
  cfg.methods = {detect::Method::MostProbable};
  const auto report = harness::run_sweep(db, cfg);
  double err[2] = {0, 0};
  std::size_t n[2] = {0, 0};
  for (const auto& row : report.rows) {
    ASSERT_TRUE(row.ok());
    const int k = row.t_obs == 60 ? 0 : 1;
    err[k] += std::abs(row.eta_pred - row.eta_true);
    ++n[k];
  }
  EXPECT_EQ(n[0], 190u);
  EXPECT_LE(err[1] / static_cast<double>(n[1]), err[0] / static_cast<double>(n[0]));
}

TEST(Sweep, CorruptScenarioIsIsolated) {
  auto db = fixtures::toy_database(12);
  db.scenarios[5].waveforms(2, 10) = std::nan("");
  auto cfg = toy_sweep_config();
  cfg.folds = 3;
  const auto folds = harness::kfold_split(db.size(), 3, cfg.seed);
  const auto report = harness::run_sweep_with_folds(db, cfg, folds);
  EXPECT_EQ(report.rows.size(), 12u * 3u * cfg.windows.size());
  for (const auto& row : report.rows) {
    if (row.scenario_id == 5) {
      EXPECT_FALSE(row.ok());
      EXPECT_TRUE(std::isnan(row.eta_pred));
    } else {
      EXPECT_TRUE(row.ok()) << row.error;
    }
  }
  for (const auto& f : report.folds) {
    EXPECT_EQ(std::find(f.train_ids.begin(), f.train_ids.end(), 5), f.train_ids.end());
  }
}

TEST(Sweep, ConfigValidation) {
  const auto db = fixtures::toy_database(6);
  auto cfg = toy_sweep_config();
  cfg.windows = {120, 60};
  EXPECT_THROW((void)harness::run_sweep(db, cfg), ConfigError);
  cfg = toy_sweep_config();
  cfg.windows = {2};
  EXPECT_THROW((void)harness::run_sweep(db, cfg), ConfigError);
  cfg = toy_sweep_config();
  cfg.windows = {db.horizon() + 5};
  EXPECT_THROW((void)harness::run_sweep(db, cfg), ConfigError);
  cfg = toy_sweep_config();
  cfg.folds = 1;
  EXPECT_THROW((void)harness::run_sweep(db, cfg), ConfigError);
  cfg = toy_sweep_config();
  cfg.folds = 7;
  EXPECT_THROW((void)harness::run_sweep(db, cfg), ConfigError);
}

TEST(Aggregate, GroupsByMethodAndWindowSkippingFailures) {
  std::vector<harness::SweepRow> rows(5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].method = i < 3 ? detect::Method::MostProbable : detect::Method::ShortestDtw;
    rows[i].t_obs = 60;
    rows[i].eta_pred = static_cast<double>(i);
    rows[i].eta_true = 0.0;
  }
  rows[1].error = "boom";
  const auto box = harness::aggregate(rows);
  ASSERT_EQ(box.size(), 2u);
  EXPECT_EQ(box[0].eta_error.count, 2u);
  EXPECT_DOUBLE_EQ(box[0].eta_error.mean, 1.0);
  EXPECT_DOUBLE_EQ(box[1].eta_error.median, 3.5);
}
