#include "tsudetect/detect.hpp"

#include <algorithm>

namespace tsudetect::detect {
namespace {

void check_alignment(const bayes::PosteriorState& posterior, const ScenarioDatabase& db, std::size_t target_gauge) {
  if (posterior.size() != db.size()) {
    throw ArgumentError("posterior over " + std::to_string(posterior.size()) + " scenarios, database holds " +
                        std::to_string(db.size()));
  }
  if (db.empty()) throw ArgumentError("empty database");
  if (target_gauge >= db.n_gauges) throw ConfigError("target gauge " + std::to_string(target_gauge) + " out of range");
}

// Convex combination clamped to the hull of the inputs so rounding never
// pushes it past the extreme value.
double superpose(std::span<const double> probs, const auto& value_of) {
  double sum = 0.0, lo = 0.0, hi = 0.0;
  bool first = true;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] == 0.0) continue;
    const double v = value_of(j);
    sum += probs[j] * v;
    if (first) {
      lo = hi = v;
      first = false;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return std::clamp(sum, lo, hi);
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::MostProbable:
      return "most-probable";
    case Method::WeightedMean:
      return "weighted-mean";
    case Method::ShortestDtw:
      return "shortest-dtw";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::MostProbable, Method::WeightedMean, Method::ShortestDtw}) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

Prediction from_scenario(const ScenarioDatabase& db, std::size_t position, std::size_t target_gauge, Method method,
                         double t_obs) {
  const auto& s = db.scenarios.at(position);
  Prediction p;
  p.method = method;
  p.t_obs = t_obs;
  p.target_gauge = target_gauge;
  p.eta_max = s.eta_max_per_gauge.at(target_gauge);
  p.h_max = s.h_max;
  p.inundation = s.inundation;
  p.chosen_id = s.scenario_id;
  return p;
}

Prediction most_probable(const bayes::PosteriorState& posterior, const ScenarioDatabase& db, std::size_t target_gauge,
                         double t_obs) {
  check_alignment(posterior, db, target_gauge);
  std::size_t best = 0;
  for (std::size_t j = 1; j < db.size(); ++j) {
    const double pj = posterior.log_probs[j], pb = posterior.log_probs[best];
    if (pj > pb || (pj == pb && db.scenarios[j].scenario_id < db.scenarios[best].scenario_id)) best = j;
  }
  return from_scenario(db, best, target_gauge, Method::MostProbable, t_obs);
}

Prediction weighted_mean(const bayes::PosteriorState& posterior, const ScenarioDatabase& db, std::size_t target_gauge,
                         double t_obs) {
  check_alignment(posterior, db, target_gauge);
  const std::span<const double> probs(posterior.probs);
  Prediction p;
  p.method = Method::WeightedMean;
  p.t_obs = t_obs;
  p.target_gauge = target_gauge;
  p.eta_max = superpose(probs, [&](std::size_t j) { return db.scenarios[j].eta_max_per_gauge[target_gauge]; });
  p.h_max = superpose(probs, [&](std::size_t j) { return db.scenarios[j].h_max; });
  p.inundation = InundationGrid(db.grid.nx, db.grid.ny);
  for (std::size_t c = 0; c < p.inundation.size(); ++c) {
    p.inundation.depths[c] = superpose(probs, [&](std::size_t j) { return db.scenarios[j].inundation.depths[c]; });
  }
  return p;
}

Prediction shortest_dtw(const ScenarioDatabase& db, const Matrix& chi, const ObservationWindow& window,
                        std::size_t target_gauge, const dtw::MultiGaugeOptions& opts) {
  if (target_gauge >= db.n_gauges) throw ConfigError("target gauge " + std::to_string(target_gauge) + " out of range");
  const std::size_t best = dtw::shortest_dtw_scenario(db, chi, window.step_count(), opts);
  return from_scenario(db, best, target_gauge, Method::ShortestDtw, window.t_obs());
}

}  // namespace tsudetect::detect
