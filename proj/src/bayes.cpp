#include "tsudetect/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>

namespace tsudetect::bayes {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void normalize_from_logs(PosteriorState& state, std::vector<double> logs) {
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double v : logs) sum += std::exp(v - top);
  const double lse = top + std::log(sum);
  state.log_probs.resize(logs.size());
  state.probs.resize(logs.size());
  double total = 0.0;
  for (std::size_t j = 0; j < logs.size(); ++j) {
    state.log_probs[j] = logs[j] - lse;
    state.probs[j] = std::exp(state.log_probs[j]);
    total += state.probs[j];
  }
  for (double& p : state.probs) p /= total;
}

}  // namespace

LikelihoodModel::LikelihoodModel(std::vector<double> covariance_diag, double scale_factor)
    : covariance_(std::move(covariance_diag)), scale_(scale_factor), log_norm_(0.0) {
  if (covariance_.empty()) throw ConfigError("likelihood model needs at least one mode");
  double log_det = 0.0;
  for (std::size_t l = 0; l < covariance_.size(); ++l) {
    if (!(covariance_[l] > 0.0) || !std::isfinite(covariance_[l])) {
      throw ConfigError("likelihood model: covariance entry " + std::to_string(l) + " is not strictly positive");
    }
    log_det += std::log(covariance_[l]);
  }
  log_norm_ = -0.5 * static_cast<double>(covariance_.size()) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
}

LikelihoodModel LikelihoodModel::from_basis(const pod::PodBasis& basis, double scale_factor, CovariancePolicy policy) {
  if (!(scale_factor > 0.0)) throw ConfigError("likelihood scale factor must be positive");
  double total = 0.0;
  for (double l : basis.eigenvalues) total += l;
  std::vector<double> diag(basis.r);
  for (std::size_t l = 0; l < basis.r; ++l) {
    const double sigma = policy == CovariancePolicy::Eigenvalues ? basis.eigenvalues[l] : basis.eigenvalues[l] / total;
    diag[l] = scale_factor * std::sqrt(sigma);
  }
  return LikelihoodModel(std::move(diag), scale_factor);
}

double mahalanobis(std::span<const double> a, std::span<const double> b, const LikelihoodModel& model) {
  if (a.size() != b.size() || a.size() != model.r()) {
    throw ArgumentError("mahalanobis: vector lengths " + std::to_string(a.size()) + ", " + std::to_string(b.size()) +
                        " do not match r = " + std::to_string(model.r()));
  }
  const auto& p = model.covariance_diag();
  double sum = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const double d = a[l] - b[l];
    sum += d * d / p[l];
  }
  return std::sqrt(sum);
}

double log_likelihood(double distance, const LikelihoodModel& model) {
  if (std::isnan(distance)) throw DataError("likelihood: distance is NaN");
  if (std::isinf(distance)) return kNegInf;
  return model.log_normalizer() - 0.5 * distance * distance;
}

double likelihood(double distance, const LikelihoodModel& model) { return std::exp(log_likelihood(distance, model)); }

PosteriorState uniform_prior(std::size_t n_scenarios, bool keep_history) {
  if (n_scenarios == 0) throw ArgumentError("prior over an empty database");
  const std::vector<double> flat(n_scenarios, 1.0);
  return make_prior(flat, keep_history);
}

PosteriorState make_prior(std::span<const double> probs, bool keep_history) {
  if (probs.empty()) throw ArgumentError("prior over an empty database");
  std::vector<double> logs(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (!(probs[j] >= 0.0) || !std::isfinite(probs[j])) throw ArgumentError("prior probabilities must be finite and >= 0");
    logs[j] = probs[j] > 0.0 ? std::log(probs[j]) : kNegInf;
  }
  if (std::all_of(logs.begin(), logs.end(), [](double v) { return v == kNegInf; })) {
    throw ArgumentError("prior has no mass");
  }
  PosteriorState state;
  normalize_from_logs(state, std::move(logs));
  if (keep_history) state.history.emplace();
  return state;
}

PosteriorState update_log(PosteriorState state, std::span<const double> log_likelihoods) {
  if (log_likelihoods.size() != state.size()) {
    throw ArgumentError("update: " + std::to_string(log_likelihoods.size()) + " likelihoods for " +
                        std::to_string(state.size()) + " scenarios");
  }
  std::vector<double> logs(state.size());
  bool any_mass = false;
  for (std::size_t j = 0; j < logs.size(); ++j) {
    if (std::isnan(log_likelihoods[j])) throw DataError("update: NaN likelihood for scenario index " + std::to_string(j));
    logs[j] = state.log_probs[j] == kNegInf ? kNegInf : state.log_probs[j] + log_likelihoods[j];
    any_mass = any_mass || logs[j] != kNegInf;
  }
  if (any_mass) {
    normalize_from_logs(state, std::move(logs));
  } else {
    ++state.degenerate_steps;
    std::clog << "warning: every scenario likelihood vanished at step " << state.step << "; keeping the prior\n";
  }
  ++state.step;
  if (state.history) state.history->push_back(state.probs);
  return state;
}

std::vector<double> step_log_likelihoods(const Eigen::Ref<const Vector>& projected, const pod::CoefficientSet& coeffs,
                                         std::size_t m, const LikelihoodModel& model) {
  if (m >= coeffs.n_steps()) {
    throw ArgumentError("update: step " + std::to_string(m) + " beyond the coefficient horizon of " +
                        std::to_string(coeffs.n_steps()));
  }
  const auto r = static_cast<std::size_t>(projected.size());
  const std::span<const double> obs(projected.data(), r);
  std::vector<double> out(coeffs.size());
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    const auto& c = coeffs.coefficients[j];
    const std::span<const double> col(c.data() + static_cast<std::ptrdiff_t>(m) * c.rows(), static_cast<std::size_t>(c.rows()));
    out[j] = log_likelihood(mahalanobis(col, obs, model), model);
  }
  return out;
}

PosteriorState update(PosteriorState state, const Eigen::Ref<const Vector>& projected, const pod::CoefficientSet& coeffs,
                      const LikelihoodModel& model) {
  if (coeffs.size() != state.size()) throw ArgumentError("update: coefficient set does not match the posterior size");
  const auto lls = step_log_likelihoods(projected, coeffs, state.step, model);
  return update_log(std::move(state), lls);
}

std::vector<PosteriorState> run_sequence_checkpoints(const pod::CoefficientSet& coeffs, const pod::PodBasis& basis,
                                                     const Eigen::Ref<const Matrix>& observed,
                                                     std::span<const std::size_t> checkpoints,
                                                     const LikelihoodModel& model, PosteriorState prior) {
  if (checkpoints.empty()) throw ArgumentError("run_sequence: no checkpoints requested");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] == 0) throw ArgumentError("run_sequence: observation window shorter than one sampling period");
    if (i > 0 && checkpoints[i] < checkpoints[i - 1]) throw ArgumentError("run_sequence: checkpoints must ascend");
  }
  const std::size_t last = checkpoints.back();
  if (static_cast<std::size_t>(observed.cols()) < last) {
    throw ArgumentError("run_sequence: only " + std::to_string(observed.cols()) + " observed steps for a window of " +
                        std::to_string(last));
  }
  if (coeffs.size() != prior.size()) throw ArgumentError("run_sequence: prior does not match the coefficient set");
  if (model.r() != basis.r) throw ArgumentError("run_sequence: likelihood model and basis disagree on r");

  std::vector<PosteriorState> out;
  out.reserve(checkpoints.size());
  PosteriorState state = std::move(prior);
  std::size_t next = 0;
  for (std::size_t m = 0; m < last; ++m) {
    const Vector projected = pod::project(basis, observed.col(static_cast<Eigen::Index>(m)));
    state = update(std::move(state), projected, coeffs, model);
    while (next < checkpoints.size() && checkpoints[next] == m + 1) {
      out.push_back(state);
      ++next;
    }
  }
  return out;
}

PosteriorState run_sequence(const pod::CoefficientSet& coeffs, const pod::PodBasis& basis,
                            const Eigen::Ref<const Matrix>& observed, std::size_t steps, const LikelihoodModel& model,
                            PosteriorState prior) {
  const std::size_t checkpoint[] = {steps};
  return std::move(run_sequence_checkpoints(coeffs, basis, observed, checkpoint, model, std::move(prior)).back());
}

}  // namespace tsudetect::bayes
