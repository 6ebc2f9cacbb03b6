#pragma once
// Sequential Bayesian posterior over database scenarios.
//
// At every observation step the observed snapshot is projected onto the POD
// modes, each scenario's coefficient column at the same step is compared to
// it through a diagonal Mahalanobis distance, and the resulting Gaussian
// likelihoods reweight the running posterior. All probability arithmetic
// happens in log space.

#include "tsudetect/pod.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tsudetect::bayes {

// How the per-mode covariance is derived from the POD spectrum. Both use
// P = scale * Sigma^(1/2) with Sigma diagonal.
enum class CovariancePolicy {
  Eigenvalues,            // Sigma = diag(lambda_1 .. lambda_r)
  NormalizedEigenvalues,  // Sigma = diag(lambda_l / sum(lambda))
};

class LikelihoodModel {
 public:
  // Throws ConfigError unless every entry is finite and strictly positive.
  explicit LikelihoodModel(std::vector<double> covariance_diag, double scale_factor = 0.1);

  [[nodiscard]] static LikelihoodModel from_basis(const pod::PodBasis& basis, double scale_factor = 0.1,
                                                  CovariancePolicy policy = CovariancePolicy::Eigenvalues);

  [[nodiscard]] std::size_t r() const { return covariance_.size(); }
  [[nodiscard]] const std::vector<double>& covariance_diag() const { return covariance_; }
  [[nodiscard]] double scale_factor() const { return scale_; }
  // log of (2 pi)^(-r/2) det(P)^(-1/2)
  [[nodiscard]] double log_normalizer() const { return log_norm_; }

 private:
  std::vector<double> covariance_;
  double scale_;
  double log_norm_;
};

[[nodiscard]] double mahalanobis(std::span<const double> a, std::span<const double> b, const LikelihoodModel& model);

[[nodiscard]] double log_likelihood(double distance, const LikelihoodModel& model);
[[nodiscard]] double likelihood(double distance, const LikelihoodModel& model);

struct PosteriorState {
  std::vector<double> log_probs;  // normalized: logsumexp == 0
  std::vector<double> probs;
  std::size_t step = 0;
  std::size_t degenerate_steps = 0;  // steps where every likelihood vanished
  std::optional<std::vector<std::vector<double>>> history;

  [[nodiscard]] std::size_t size() const { return probs.size(); }
};

[[nodiscard]] PosteriorState uniform_prior(std::size_t n_scenarios, bool keep_history = false);

// Prior from explicit probabilities (renormalized). Zero entries stay zero.
[[nodiscard]] PosteriorState make_prior(std::span<const double> probs, bool keep_history = false);

// Applies one step of per-scenario log-likelihoods. If every term is -inf the
// prior is kept and degenerate_steps is incremented.
[[nodiscard]] PosteriorState update_log(PosteriorState state, std::span<const double> log_likelihoods);

// Full step: distances from the projected observation to each scenario's
// coefficient column at `state.step`.
[[nodiscard]] PosteriorState update(PosteriorState state, const Eigen::Ref<const Vector>& projected,
                                    const pod::CoefficientSet& coeffs, const LikelihoodModel& model);

// Per-scenario log-likelihoods for one projected observation at step m.
[[nodiscard]] std::vector<double> step_log_likelihoods(const Eigen::Ref<const Vector>& projected,
                                                       const pod::CoefficientSet& coeffs, std::size_t m,
                                                       const LikelihoodModel& model);

// Runs project -> mahalanobis -> likelihood -> update over the first
// `steps` columns of `observed` (N_g x >= steps).
[[nodiscard]] PosteriorState run_sequence(const pod::CoefficientSet& coeffs, const pod::PodBasis& basis,
                                          const Eigen::Ref<const Matrix>& observed, std::size_t steps,
                                          const LikelihoodModel& model, PosteriorState prior);

// Same as run_sequence but returns a snapshot of the posterior after each of
// the requested step counts (ascending, each >= 1).
[[nodiscard]] std::vector<PosteriorState> run_sequence_checkpoints(const pod::CoefficientSet& coeffs,
                                                                   const pod::PodBasis& basis,
                                                                   const Eigen::Ref<const Matrix>& observed,
                                                                   std::span<const std::size_t> checkpoints,
                                                                   const LikelihoodModel& model, PosteriorState prior);

}  // namespace tsudetect::bayes
