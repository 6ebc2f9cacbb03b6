#include "tsudetect/harness.hpp"

#include "tsudetect/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <iostream>
#include <limits>
#include <map>
#include <thread>

namespace tsudetect::harness {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kNoiseStream = 0x6E6F697365ull;

bool is_bayesian(detect::Method m) { return m != detect::Method::ShortestDtw; }

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

SweepRow base_row(std::size_t fold, const ScenarioRecord& truth, std::size_t target, detect::Method method,
                  double t_obs, const std::optional<ArrivalInfo>& arrival) {
  SweepRow row;
  row.fold = fold;
  row.scenario_id = truth.scenario_id;
  row.method = method;
  row.t_obs = t_obs;
  row.eta_true = truth.eta_max_per_gauge.at(target);
  row.h_true = truth.h_max;
  if (arrival) row.t_arrv = arrival->t_arrv;
  return row;
}

void fill_row(SweepRow& row, const detect::Prediction& pred, const ScenarioRecord& truth, const SweepConfig& cfg) {
  row.eta_pred = pred.eta_max;
  row.h_pred = pred.h_max;
  row.chosen_id = pred.chosen_id;
  row.counts = metrics::classify_inundation(pred.inundation, truth.inundation, cfg.wet_threshold);
  std::tie(row.tpr, row.fpr) = metrics::tpr_fpr(row.counts);
  if (cfg.keep_grids) row.predicted_grid = pred.inundation;
}

void mark_failed(SweepRow& row, const std::string& message) {
  row.error = message.empty() ? "unknown failure" : message;
  row.eta_pred = row.h_pred = row.tpr = row.fpr = kNaN;
  row.counts = {};
  row.chosen_id.reset();
  row.predicted_grid.reset();
}

struct FoldModel {
  ScenarioDatabase train;
  pod::PodBasis basis;
  pod::CoefficientSet coeffs;
  std::optional<bayes::LikelihoodModel> likelihood;
};

}  // namespace

std::optional<ArrivalInfo> detect_arrival(const GaugeSeries& series, const PeakOptions& opts) {
  const auto& x = series.samples;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(x[i - 1] < x[i])) {
      ++i;
      continue;
    }
    // Walk across a plateau of equal values.
    std::size_t ahead = i + 1;
    while (ahead < n && x[ahead] == x[i]) ++ahead;
    if (ahead >= n) break;  // plateau runs into the end
    if (x[ahead] < x[i]) {
      const std::size_t peak = (i + ahead - 1) / 2;
      const double height = x[i];
      // Prominence: lowest point on each side before reaching higher ground.
      double left_min = height;
      for (std::size_t l = i; l-- > 0;) {
        if (x[l] > height) break;
        left_min = std::min(left_min, x[l]);
      }
      double right_min = height;
      for (std::size_t rgt = ahead; rgt < n; ++rgt) {
        if (x[rgt] > height) break;
        right_min = std::min(right_min, x[rgt]);
      }
      const double prominence = height - std::max(left_min, right_min);
      if (height >= opts.min_height && prominence >= opts.prominence) {
        return ArrivalInfo{series.time_at(peak), height, peak};
      }
    }
    i = ahead;
  }
  return std::nullopt;
}

ScenarioDatabase filter_scenarios(const ScenarioDatabase& db, double threshold, std::size_t gauge) {
  if (gauge >= db.n_gauges) throw ConfigError("filter: gauge " + std::to_string(gauge) + " out of range");
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < db.size(); ++j) {
    if (db.scenarios[j].eta_max_per_gauge.at(gauge) >= threshold) keep.push_back(j);
  }
  if (keep.empty()) {
    throw ConfigError("filter: no scenario reaches " + std::to_string(threshold) + " m at gauge " + std::to_string(gauge));
  }
  return db.subset(keep);
}

std::vector<Fold> kfold_split(std::size_t n_scenarios, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("kfold: need at least 2 folds");
  if (k > n_scenarios) {
    throw ConfigError("kfold: " + std::to_string(k) + " folds for " + std::to_string(n_scenarios) + " scenarios");
  }
  std::vector<std::size_t> order(n_scenarios);
  for (std::size_t i = 0; i < n_scenarios; ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0));
  for (std::size_t i = n_scenarios; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  std::vector<std::vector<bool>> in_test(k, std::vector<bool>(n_scenarios, false));
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < n_scenarios; ++i) in_test[i % k][order[i]] = true;
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t j = 0; j < n_scenarios; ++j) (in_test[f][j] ? folds[f].test : folds[f].train).push_back(j);
  }
  return folds;
}

void SweepConfig::validate(const ScenarioDatabase& db) const {
  if (windows.empty()) throw ConfigError("sweep: no observation windows");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const ObservationWindow w(windows[i], db.dt, db.horizon());
    if (w.step_count() == 0) throw ConfigError("sweep: window shorter than one sampling period");
    if (i > 0 && !(windows[i] > windows[i - 1])) throw ConfigError("sweep: windows must be strictly ascending");
  }
  if (folds < 2) throw ConfigError("sweep: need at least 2 folds");
  if (methods.empty()) throw ConfigError("sweep: no methods selected");
  if (target(db) >= db.n_gauges) throw ConfigError("sweep: target gauge out of range");
  if (!(likelihood_scale > 0.0)) throw ConfigError("sweep: likelihood scale must be positive");
  if (noise_sigma < 0.0) throw ConfigError("sweep: noise sigma must be non-negative");
}

std::uint64_t hash_training_input(const ScenarioDatabase& train) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const auto& s : train.scenarios) {
    h = fnv1a(h, &s.scenario_id, sizeof(s.scenario_id));
    h = fnv1a(h, s.waveforms.data(), static_cast<std::size_t>(s.waveforms.size()) * sizeof(double));
  }
  return h;
}

std::vector<BoxRow> aggregate(const std::vector<SweepRow>& rows) {
  struct Samples {
    std::vector<double> eta, h, tpr, fpr;
  };
  std::vector<std::pair<detect::Method, double>> order;
  std::map<std::pair<int, double>, Samples> groups;
  for (const auto& row : rows) {
    if (!row.ok()) continue;
    const auto key = std::make_pair(static_cast<int>(row.method), row.t_obs);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.emplace_back(row.method, row.t_obs);
    it->second.eta.push_back(metrics::absolute_error(row.eta_pred, row.eta_true));
    it->second.h.push_back(metrics::absolute_error(row.h_pred, row.h_true));
    it->second.tpr.push_back(row.tpr);
    it->second.fpr.push_back(row.fpr);
  }
  std::vector<BoxRow> out;
  out.reserve(order.size());
  for (const auto& [method, t_obs] : order) {
    const auto& g = groups.at({static_cast<int>(method), t_obs});
    out.push_back(BoxRow{method, t_obs, metrics::box_stats(g.eta), metrics::box_stats(g.h), metrics::box_stats(g.tpr),
                         metrics::box_stats(g.fpr)});
  }
  return out;
}

SweepReport run_sweep_with_folds(const ScenarioDatabase& db, const SweepConfig& cfg, const std::vector<Fold>& folds) {
  db.validate();
  cfg.validate(db);
  const std::size_t target = cfg.target(db);

  std::vector<std::size_t> window_steps;
  for (double t : cfg.windows) window_steps.push_back(ObservationWindow(t, db.dt, db.horizon()).step_count());
  std::vector<std::size_t> dtw_steps = window_steps;
  std::vector<double> dtw_times = cfg.windows;
  if (cfg.full_history && window_steps.back() < db.n_steps) {
    dtw_steps.push_back(db.n_steps);
    dtw_times.push_back(db.horizon());
  }
  const bool want_bayes = std::any_of(cfg.methods.begin(), cfg.methods.end(), is_bayesian);
  const bool want_dtw = std::any_of(cfg.methods.begin(), cfg.methods.end(), [](auto m) { return !is_bayesian(m); });

  SweepReport report;
  report.retained = db.size();

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Fold& fold = folds[f];
    FoldInfo info;
    info.fold = f;
    FoldModel fm;
    // A corrupt training scenario is dropped rather than poisoning the fold.
    std::vector<std::size_t> usable;
    for (std::size_t p : fold.train) {
      if (db.scenarios.at(p).waveforms.allFinite()) {
        usable.push_back(p);
      } else {
        std::clog << "warning: fold " << f << " skips training scenario " << db.scenarios[p].scenario_id
                  << " with non-finite samples\n";
      }
    }
    fm.train = db.subset(usable);
    for (const auto& s : fm.train.scenarios) info.train_ids.push_back(s.scenario_id);
    for (std::size_t p : fold.test) info.test_ids.push_back(db.scenarios.at(p).scenario_id);
    info.basis_input_hash = hash_training_input(fm.train);

    std::string fold_error;
    if (fm.train.empty()) fold_error = "empty training fold";
    if (fold_error.empty() && want_bayes) {
      try {
        fm.basis = pod::compute_basis(pod::assemble_matrix(fm.train), cfg.mode_rule);
        fm.coeffs = pod::extract_coefficients(fm.basis, fm.train, window_steps.back());
        fm.likelihood = bayes::LikelihoodModel::from_basis(fm.basis, cfg.likelihood_scale, cfg.covariance_policy);
        info.r = fm.basis.r;
      } catch (const std::exception& e) {
        fold_error = e.what();
      }
    }

    std::vector<std::vector<SweepRow>> slots(fold.test.size());
    parallel_for(fold.test.size(), cfg.workers, [&](std::size_t t) {
      const ScenarioRecord& truth = db.scenarios[fold.test[t]];
      const auto arrival = detect_arrival(truth.gauge(target, db.dt), cfg.peaks);
      auto& out = slots[t];
      for (detect::Method method : cfg.methods) {
        const auto& times = is_bayesian(method) ? cfg.windows : dtw_times;
        for (double t_obs : times) out.push_back(base_row(f, truth, target, method, t_obs, arrival));
      }
      try {
        if (!fold_error.empty()) throw Error(fold_error);
        if (!truth.waveforms.allFinite()) {
          throw DataError("non-finite samples in test scenario " + std::to_string(truth.scenario_id));
        }
        Matrix observed = truth.waveforms;
        if (cfg.noise_sigma > 0.0) {
          Rng rng(derive_seed(cfg.seed ^ kNoiseStream, static_cast<std::uint64_t>(truth.scenario_id)));
          for (Eigen::Index g = 0; g < observed.rows(); ++g)
            for (Eigen::Index m = 0; m < observed.cols(); ++m) observed(g, m) += cfg.noise_sigma * rng.normal();
        }
        std::vector<bayes::PosteriorState> posteriors;
        if (want_bayes) {
          posteriors = bayes::run_sequence_checkpoints(fm.coeffs, fm.basis, observed, window_steps, *fm.likelihood,
                                                       bayes::uniform_prior(fm.train.size()));
        }
        std::vector<std::size_t> nearest;
        if (want_dtw) nearest = dtw::shortest_dtw_scenarios(fm.train, observed, dtw_steps, cfg.dtw);

        std::size_t idx = 0;
        for (detect::Method method : cfg.methods) {
          const auto& times = is_bayesian(method) ? cfg.windows : dtw_times;
          for (std::size_t w = 0; w < times.size(); ++w, ++idx) {
            SweepRow& row = out[idx];
            try {
              detect::Prediction pred;
              switch (method) {
                case detect::Method::MostProbable:
                  pred = detect::most_probable(posteriors[w], fm.train, target, times[w]);
                  break;
                case detect::Method::WeightedMean:
                  pred = detect::weighted_mean(posteriors[w], fm.train, target, times[w]);
                  break;
                case detect::Method::ShortestDtw:
                  pred = detect::from_scenario(fm.train, nearest[w], target, method, times[w]);
                  break;
              }
              fill_row(row, pred, truth, cfg);
            } catch (const std::exception& e) {
              mark_failed(row, e.what());
            }
          }
        }
      } catch (const std::exception& e) {
        for (auto& row : out) mark_failed(row, e.what());
      }
    });
    for (auto& slot : slots)
      for (auto& row : slot) report.rows.push_back(std::move(row));
    report.folds.push_back(std::move(info));
  }
  report.box = aggregate(report.rows);
  return report;
}

SweepReport run_sweep(const ScenarioDatabase& db, const SweepConfig& cfg) {
  cfg.validate(db);
  const ScenarioDatabase kept = filter_scenarios(db, cfg.amplitude_threshold, cfg.target(db));
  const auto folds = kfold_split(kept.size(), cfg.folds, cfg.seed);
  return run_sweep_with_folds(kept, cfg, folds);
}

}  // namespace tsudetect::harness
