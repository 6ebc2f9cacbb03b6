#pragma once
// Proper orthogonal decomposition of the gauge snapshot matrix.
//
// The data matrix X stacks every snapshot of every scenario as a column
// (scenario-major, then time), so X is N_g x (N_t * N_s). Modes are the
// leading eigenvectors of the N_g x N_g Gram matrix X X^T; their eigenvalues
// are the squared singular values of X. X is not mean-centered.

#include "tsudetect/core.hpp"

#include <variant>
#include <vector>

namespace tsudetect::pod {

struct FixedModes {
  std::size_t r = 1;
};

struct ContributionThreshold {
  double theta = 0.9;
};

using ModeRule = std::variant<FixedModes, ContributionThreshold>;

struct PodBasis {
  Matrix modes;                       // N_g x r, orthonormal columns
  Matrix pseudoinverse;               // r x N_g
  std::vector<double> eigenvalues;    // all N_g, descending
  std::vector<double> contribution;   // contribution[i] = c(i + 1)
  std::size_t r = 0;

  [[nodiscard]] std::size_t n_gauges() const { return static_cast<std::size_t>(modes.rows()); }
};

// Per-scenario coefficient series: coefficients[j] is r x N_t, column m is
// the projection of scenario j's snapshot at step m.
struct CoefficientSet {
  std::vector<int> scenario_ids;
  std::vector<Matrix> coefficients;

  [[nodiscard]] std::size_t size() const { return coefficients.size(); }
  [[nodiscard]] std::size_t n_steps() const {
    return coefficients.empty() ? 0 : static_cast<std::size_t>(coefficients.front().cols());
  }
};

[[nodiscard]] Matrix assemble_matrix(const ScenarioDatabase& db);

[[nodiscard]] PodBasis compute_basis(const Matrix& x, const ModeRule& rule = ContributionThreshold{});

// Same as compute_basis(X) given G = X X^T directly.
[[nodiscard]] PodBasis compute_basis_from_gram(const Matrix& gram, const ModeRule& rule = ContributionThreshold{});

// Smallest r with c(r) >= theta.
[[nodiscard]] std::size_t modes_for_threshold(const std::vector<double>& contribution, double theta);

// General Moore-Penrose inverse via SVD, dropping singular values below
// rel_tol * sigma_max.
[[nodiscard]] Matrix moore_penrose(const Matrix& a, double rel_tol = 1e-12);

[[nodiscard]] Vector project(const PodBasis& basis, const Eigen::Ref<const Vector>& snapshot);

// Projects a whole N_g x n block of snapshots at once.
[[nodiscard]] Matrix project_block(const PodBasis& basis, const Eigen::Ref<const Matrix>& snapshots);

// max_steps = 0 keeps every step; otherwise only the first max_steps columns.
[[nodiscard]] CoefficientSet extract_coefficients(const PodBasis& basis, const ScenarioDatabase& db,
                                                  std::size_t max_steps = 0);

}  // namespace tsudetect::pod
