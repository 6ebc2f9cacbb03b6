#pragma once
// The three risk estimators: most probable scenario, probability-weighted
// superposition, and shortest multi-gauge DTW distance.

#include "tsudetect/bayes.hpp"
#include "tsudetect/dtw.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace tsudetect::detect {

enum class Method { MostProbable, WeightedMean, ShortestDtw };

[[nodiscard]] std::string_view method_name(Method m);
// Accepts "most-probable", "weighted-mean", "shortest-dtw".
[[nodiscard]] Method parse_method(std::string_view name);

struct Prediction {
  Method method = Method::MostProbable;
  double t_obs = 0.0;
  std::size_t target_gauge = 0;
  double eta_max = 0.0;
  double h_max = 0.0;
  InundationGrid inundation;
  std::optional<int> chosen_id;  // absent for WeightedMean
};

// Copies the indices of the scenario at `position` in db.
[[nodiscard]] Prediction from_scenario(const ScenarioDatabase& db, std::size_t position, std::size_t target_gauge,
                                       Method method, double t_obs);

// Posterior argmax; ties go to the lowest scenario id. The posterior is
// aligned with db.scenarios.
[[nodiscard]] Prediction most_probable(const bayes::PosteriorState& posterior, const ScenarioDatabase& db,
                                       std::size_t target_gauge, double t_obs = 0.0);

[[nodiscard]] Prediction weighted_mean(const bayes::PosteriorState& posterior, const ScenarioDatabase& db,
                                       std::size_t target_gauge, double t_obs = 0.0);

[[nodiscard]] Prediction shortest_dtw(const ScenarioDatabase& db, const Matrix& chi, const ObservationWindow& window,
                                      std::size_t target_gauge, const dtw::MultiGaugeOptions& opts = {});

}  // namespace tsudetect::detect
