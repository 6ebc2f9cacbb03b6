#include "tsudetect/pod.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace tsudetect::pod {

Matrix assemble_matrix(const ScenarioDatabase& db) {
  if (db.empty()) throw InconsistentDatabaseError("assemble_matrix: empty database");
  const auto n_g = static_cast<Eigen::Index>(db.n_gauges);
  const auto n_t = static_cast<Eigen::Index>(db.n_steps);
  Matrix x(n_g, n_t * static_cast<Eigen::Index>(db.size()));
  for (std::size_t j = 0; j < db.size(); ++j) {
    const auto& w = db.scenarios[j].waveforms;
    if (w.rows() != n_g || w.cols() != n_t) {
      throw InconsistentDatabaseError("assemble_matrix: scenario " + std::to_string(db.scenarios[j].scenario_id) +
                                      " does not match the database shape");
    }
    x.middleCols(static_cast<Eigen::Index>(j) * n_t, n_t) = w;
  }
  return x;
}

std::size_t modes_for_threshold(const std::vector<double>& contribution, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("contribution threshold must lie in (0, 1]");
  for (std::size_t i = 0; i < contribution.size(); ++i) {
    // c(N_g) may land an ulp below 1.
    if (contribution[i] >= theta - 1e-12) return i + 1;
  }
  return contribution.size();
}

Matrix moore_penrose(const Matrix& a, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

PodBasis compute_basis_from_gram(const Matrix& gram, const ModeRule& rule) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) throw ArgumentError("compute_basis: Gram matrix must be square");
  if (!gram.allFinite()) throw DataError("compute_basis: non-finite data");
  const double trace = gram.trace();
  if (!(trace > 0.0)) throw DataError("compute_basis: degenerate input (all-zero data matrix)");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw DataError("compute_basis: eigendecomposition failed");
  const auto n = gram.rows();

  PodBasis basis;
  basis.eigenvalues.resize(static_cast<std::size_t>(n));
  Matrix vectors(n, n);
  // Eigen sorts ascending; flip to descending.
  for (Eigen::Index i = 0; i < n; ++i) {
    basis.eigenvalues[static_cast<std::size_t>(i)] = std::max(0.0, eig.eigenvalues()(n - 1 - i));
    vectors.col(i) = eig.eigenvectors().col(n - 1 - i);
  }
  // Deterministic sign: largest-magnitude component positive.
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index arg = 0;
    vectors.col(i).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, i) < 0.0) vectors.col(i) *= -1.0;
  }

  double total = 0.0;
  for (double l : basis.eigenvalues) total += l;
  basis.contribution.resize(basis.eigenvalues.size());
  double running = 0.0;
  for (std::size_t i = 0; i < basis.eigenvalues.size(); ++i) {
    running += basis.eigenvalues[i];
    basis.contribution[i] = running / total;
  }

  if (const auto* fixed = std::get_if<FixedModes>(&rule)) {
    if (fixed->r == 0 || fixed->r > static_cast<std::size_t>(n)) {
      throw ConfigError("compute_basis: fixed mode count must lie in [1, " + std::to_string(n) + "]");
    }
    basis.r = fixed->r;
  } else {
    basis.r = modes_for_threshold(basis.contribution, std::get<ContributionThreshold>(rule).theta);
  }

  basis.modes = vectors.leftCols(static_cast<Eigen::Index>(basis.r));
  const Matrix gram_r = basis.modes.transpose() * basis.modes;
  const double ortho_err = (gram_r - Matrix::Identity(gram_r.rows(), gram_r.cols())).cwiseAbs().maxCoeff();
  if (ortho_err <= 1e-10) {
    basis.pseudoinverse = basis.modes.transpose();
  } else {
    basis.pseudoinverse = moore_penrose(basis.modes);
  }
  return basis;
}

PodBasis compute_basis(const Matrix& x, const ModeRule& rule) {
  if (!x.allFinite()) throw DataError("compute_basis: non-finite data");
  return compute_basis_from_gram(x * x.transpose(), rule);
}

Vector project(const PodBasis& basis, const Eigen::Ref<const Vector>& snapshot) {
  if (static_cast<std::size_t>(snapshot.size()) != basis.n_gauges()) {
    throw ArgumentError("project: snapshot has " + std::to_string(snapshot.size()) + " entries, basis expects " +
                        std::to_string(basis.n_gauges()));
  }
  if (!snapshot.allFinite()) throw DataError("project: non-finite value in snapshot");
  return basis.pseudoinverse * snapshot;
}

Matrix project_block(const PodBasis& basis, const Eigen::Ref<const Matrix>& snapshots) {
  if (static_cast<std::size_t>(snapshots.rows()) != basis.n_gauges()) {
    throw ArgumentError("project: snapshot block has " + std::to_string(snapshots.rows()) + " gauges, basis expects " +
                        std::to_string(basis.n_gauges()));
  }
  if (!snapshots.allFinite()) throw DataError("project: non-finite value in snapshots");
  // Column-by-column so each column is bit-identical to project().
  Matrix out(basis.pseudoinverse.rows(), snapshots.cols());
  for (Eigen::Index m = 0; m < snapshots.cols(); ++m) out.col(m).noalias() = basis.pseudoinverse * snapshots.col(m);
  return out;
}

CoefficientSet extract_coefficients(const PodBasis& basis, const ScenarioDatabase& db, std::size_t max_steps) {
  const std::size_t steps = max_steps == 0 ? db.n_steps : std::min(max_steps, db.n_steps);
  CoefficientSet set;
  set.scenario_ids.reserve(db.size());
  set.coefficients.reserve(db.size());
  for (const auto& s : db.scenarios) {
    set.scenario_ids.push_back(s.scenario_id);
    set.coefficients.push_back(project_block(basis, s.waveforms.leftCols(static_cast<Eigen::Index>(steps))));
  }
  return set;
}

}  // namespace tsudetect::pod
