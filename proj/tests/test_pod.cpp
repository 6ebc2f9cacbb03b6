#include "tsudetect/pod.hpp"
#include "tsudetect/random.hpp"
#include "tsudetect/synthgen.hpp"

#include "oracles.hpp"

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace tsudetect;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

void expect_basis_invariants(const pod::PodBasis& b) {
  const auto r = static_cast<Eigen::Index>(b.r);
  const Matrix gram = b.modes.transpose() * b.modes;
  EXPECT_LE((gram - Matrix::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-10);
  for (std::size_t i = 1; i < b.contribution.size(); ++i) EXPECT_GE(b.contribution[i], b.contribution[i - 1]);
  EXPECT_NEAR(b.contribution.back(), 1.0, 1e-12);
  const Matrix pinv_id = b.pseudoinverse * b.modes;
  EXPECT_LE((pinv_id - Matrix::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-8);
  for (std::size_t i = 1; i < b.eigenvalues.size(); ++i) EXPECT_GE(b.eigenvalues[i - 1], b.eigenvalues[i]);
}

}  // namespace

TEST(Assemble, OneScenarioShape) {
  Matrix w(2, 3);
  w << 1, 2, 3, 4, 5, 6;
  const auto db = fixtures::make_database({fixtures::make_record(0, w, InundationGrid(1, 1))});
  const auto x = pod::assemble_matrix(db);
  ASSERT_EQ(x.rows(), 2);
  ASSERT_EQ(x.cols(), 3);
  EXPECT_TRUE(x == w);
}

TEST(Assemble, DuplicatedScenariosDoNotAddRank) {
  const Matrix w = random_matrix(4, 3, 1);
  const auto db = fixtures::make_database(
      {fixtures::make_record(0, w, InundationGrid(1, 1)), fixtures::make_record(1, w, InundationGrid(1, 1))});
  const auto x = pod::assemble_matrix(db);
  EXPECT_EQ(x.cols(), 6);
  EXPECT_TRUE(x.middleCols(3, 3) == w);
  Eigen::FullPivLU<Matrix> one(w), both(x);
  EXPECT_LE(both.rank(), one.rank());
}

TEST(Assemble, DefaultSyntheticShape) {
  const auto db = synth::generate_database(synth::GenConfig{});
  const auto x = pod::assemble_matrix(db);
  EXPECT_EQ(x.rows(), 16);
  EXPECT_EQ(x.cols(), 720 * 200);
}

TEST(Assemble, ShapeMismatchRejected) {
  auto db = fixtures::make_database(
      {fixtures::make_record(0, Matrix::Ones(2, 3), InundationGrid(1, 1)),
       fixtures::make_record(1, Matrix::Ones(2, 3), InundationGrid(1, 1))});
  db.scenarios[1].waveforms = Matrix::Ones(2, 4);
  EXPECT_THROW((void)pod::assemble_matrix(db), InconsistentDatabaseError);
}

TEST(Basis, SingleNonzeroRowIsRankOne) {
  Matrix x = Matrix::Zero(5, 12);
  x.row(2) = random_matrix(1, 12, 4);
  const auto b = pod::compute_basis(x);
  EXPECT_EQ(b.r, 1u);
  EXPECT_NEAR(b.contribution[0], 1.0, 1e-12);
  EXPECT_NEAR(std::abs(b.modes(2, 0)), 1.0, 1e-12);
}

TEST(Basis, RandomFourByTwentyReconstructs) {
  const Matrix x = random_matrix(4, 20, 5);
  const auto b = pod::compute_basis(x, pod::ContributionThreshold{1.0});
  EXPECT_EQ(b.r, 4u);
  EXPECT_NEAR(b.contribution[3], 1.0, 1e-12);
  const Matrix recon = b.modes * (b.pseudoinverse * x);
  EXPECT_LE((recon - x).norm() / x.norm(), 1e-10);
  expect_basis_invariants(b);
}

TEST(Basis, EigenvaluesAreSquaredSingularValues) {
  const Matrix x = random_matrix(6, 50, 6);
  const auto b = pod::compute_basis(x);
  Eigen::JacobiSVD<Matrix> svd(x);
  for (Eigen::Index i = 0; i < 6; ++i) {
    const double s = svd.singularValues()(i);
    EXPECT_NEAR(b.eigenvalues[static_cast<std::size_t>(i)], s * s, 1e-9 * s * s + 1e-12);
  }
}

TEST(Basis, InvariantsOnRandomMatrices) {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const Matrix x = random_matrix(8, 200, seed);
    const auto b = pod::compute_basis(x, pod::ContributionThreshold{0.7});
    expect_basis_invariants(b);
    double energy = 0.0;
    for (double l : b.eigenvalues) energy += l;
    EXPECT_NEAR(energy, x.squaredNorm(), 1e-10 * x.squaredNorm());
  }
}

TEST(Basis, FullRankReconstructionAndEnergyOnSyntheticData) {
  auto cfg = synth::GenConfig{};
  cfg.n_scenarios = 20;
  const auto x = pod::assemble_matrix(synth::generate_database(cfg));
  const auto b = pod::compute_basis(x, pod::ContributionThreshold{1.0});
  expect_basis_invariants(b);
  const Matrix recon = b.modes * (b.pseudoinverse * x);
  EXPECT_LE((recon - x).norm() / x.norm(), 1e-8);
}

TEST(Basis, TruncationErrorMatchesDiscardedEnergy) {
  const Matrix x = random_matrix(10, 300, 21);
  for (std::size_t r = 1; r <= 10; ++r) {
    const auto b = pod::compute_basis(x, pod::FixedModes{r});
    const Matrix recon = b.modes * (b.pseudoinverse * x);
    const double rel = (x - recon).norm() / x.norm();
    EXPECT_NEAR(rel, std::sqrt(std::max(0.0, 1.0 - b.contribution[r - 1])), 1e-8);
  }
}

TEST(Basis, ThresholdPicksSmallestSufficientR) {
  const std::vector<double> c = {0.5, 0.8, 0.9, 0.95, 1.0};
  EXPECT_EQ(pod::modes_for_threshold(c, 0.9), 3u);
  EXPECT_EQ(pod::modes_for_threshold(c, 0.85), 3u);
  EXPECT_EQ(pod::modes_for_threshold(c, 0.5), 1u);
  EXPECT_EQ(pod::modes_for_threshold(c, 1.0), 5u);
  EXPECT_THROW((void)pod::modes_for_threshold(c, 0.0), ConfigError);
  EXPECT_THROW((void)pod::modes_for_threshold(c, 1.5), ConfigError);
}

TEST(Basis, DegenerateInputs) {
  EXPECT_THROW((void)pod::compute_basis(Matrix::Zero(4, 10)), DataError);
  Matrix bad = random_matrix(3, 5, 2);
  bad(1, 1) = std::nan("");
  EXPECT_THROW((void)pod::compute_basis(bad), DataError);
  EXPECT_THROW((void)pod::compute_basis(random_matrix(3, 5, 2), pod::FixedModes{4}), ConfigError);
  EXPECT_THROW((void)pod::compute_basis(random_matrix(3, 5, 2), pod::FixedModes{0}), ConfigError);
}

TEST(Basis, GramPathMatchesDirect) {
  const Matrix x = random_matrix(5, 40, 30);
  const auto a = pod::compute_basis(x);
  const auto b = pod::compute_basis_from_gram(x * x.transpose());
  EXPECT_EQ(a.r, b.r);
  EXPECT_TRUE(a.modes == b.modes);
}

TEST(MoorePenrose, SatisfiesPenroseConditions) {
  Matrix a = random_matrix(6, 3, 40);
  a.col(2) = a.col(0) + 2.0 * a.col(1);  // rank deficient
  const Matrix p = pod::moore_penrose(a);
  EXPECT_LE((a * p * a - a).norm(), 1e-10);
  EXPECT_LE((p * a * p - p).norm(), 1e-10);
  EXPECT_LE(((a * p).transpose() - a * p).norm(), 1e-10);
  EXPECT_LE(((p * a).transpose() - p * a).norm(), 1e-10);
}

TEST(Project, ModesMapToUnitVectors) {
  const auto b = pod::compute_basis(random_matrix(6, 80, 50), pod::FixedModes{4});
  for (Eigen::Index k = 0; k < 4; ++k) {
    const Vector a = pod::project(b, b.modes.col(k));
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(a(i), i == k ? 1.0 : 0.0, 1e-12);
  }
  const Vector zero = pod::project(b, Vector::Zero(6));
  EXPECT_TRUE(zero.isZero(0.0));
}

TEST(Project, TrainingColumnMatchesStoredCoefficients) {
  const auto db = fixtures::toy_database(6);
  const auto b = pod::compute_basis(pod::assemble_matrix(db));
  const auto coeffs = pod::extract_coefficients(b, db);
  ASSERT_EQ(coeffs.size(), db.size());
  for (std::size_t j = 0; j < db.size(); ++j) {
    ASSERT_EQ(coeffs.coefficients[j].rows(), static_cast<Eigen::Index>(b.r));
    ASSERT_EQ(coeffs.coefficients[j].cols(), static_cast<Eigen::Index>(db.n_steps));
    for (Eigen::Index m = 0; m < coeffs.coefficients[j].cols(); m += 7) {
      const Vector a = pod::project(b, db.scenarios[j].waveforms.col(m));
      EXPECT_LE((a - coeffs.coefficients[j].col(m)).cwiseAbs().maxCoeff(), 1e-8);
    }
    const Matrix direct = b.modes.transpose() * db.scenarios[j].waveforms;
    EXPECT_LE((direct - coeffs.coefficients[j]).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Project, Errors) {
  const auto b = pod::compute_basis(random_matrix(4, 30, 60));
  EXPECT_THROW((void)pod::project(b, Vector::Zero(5)), ArgumentError);
  Vector v = Vector::Zero(4);
  v(2) = std::nan("");
  EXPECT_THROW((void)pod::project(b, v), DataError);
}

TEST(Coefficients, IdenticalScenariosShareCoefficients) {
  const Matrix w = random_matrix(4, 25, 70);
  const auto db = fixtures::make_database({fixtures::make_record(0, w, InundationGrid(1, 1)),
                                           fixtures::make_record(1, random_matrix(4, 25, 71), InundationGrid(1, 1)),
                                           fixtures::make_record(2, w, InundationGrid(1, 1))});
  const auto b = pod::compute_basis(pod::assemble_matrix(db));
  const auto c = pod::extract_coefficients(b, db);
  EXPECT_TRUE(c.coefficients[0] == c.coefficients[2]);
  EXPECT_EQ(c.scenario_ids, (std::vector<int>{0, 1, 2}));
}

TEST(Coefficients, RankOneDatabaseUsesFirstModeOnly) {
  const Vector shape = random_matrix(5, 1, 80).col(0);
  std::vector<ScenarioRecord> recs;
  for (int j = 0; j < 4; ++j) {
    const Matrix w = shape * random_matrix(1, 30, 81 + static_cast<std::uint64_t>(j));
    recs.push_back(fixtures::make_record(j, w, InundationGrid(1, 1)));
  }
  const auto db = fixtures::make_database(std::move(recs));
  const auto b = pod::compute_basis(pod::assemble_matrix(db), pod::FixedModes{3});
  const auto c = pod::extract_coefficients(b, db);
  for (const auto& a : c.coefficients) {
    EXPECT_LE(a.bottomRows(2).cwiseAbs().maxCoeff(), 1e-10 * a.cwiseAbs().maxCoeff());
  }
}

TEST(Coefficients, MaxStepsTruncates) {
  const auto db = fixtures::toy_database(3);
  const auto b = pod::compute_basis(pod::assemble_matrix(db));
  const auto full = pod::extract_coefficients(b, db);
  const auto head = pod::extract_coefficients(b, db, 10);
  EXPECT_EQ(head.n_steps(), 10u);
  EXPECT_TRUE(head.coefficients[1] == full.coefficients[1].leftCols(10));
}
