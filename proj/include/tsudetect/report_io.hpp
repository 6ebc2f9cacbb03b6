#pragma once
// File formats produced by the CLI: POD basis/coefficient binaries, sweep
// reports, box-statistics and scatter CSVs, prediction JSON and posterior
// logs. Numbers in CSV are written in shortest round-trip form so output is
// byte-stable.

#include "tsudetect/bayes.hpp"
#include "tsudetect/detect.hpp"
#include "tsudetect/harness.hpp"
#include "tsudetect/pod.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tsudetect::io {

[[nodiscard]] std::string format_number(double v);

// basis.bin: magic "TSDPODB1", then u64 n_gauges, u64 r, f64 eigenvalues[n_gauges],
// f64 contribution[n_gauges], f64 modes[n_gauges x r], f64 pseudoinverse[r x n_gauges].
// Integers and floats little-endian, matrices row-major.
void write_basis(const pod::PodBasis& basis, const std::filesystem::path& path);
[[nodiscard]] pod::PodBasis read_basis(const std::filesystem::path& path);

// coeffs.bin: magic "TSDPODC1", u64 n_scenarios, u64 r, u64 n_steps, then per
// scenario an i64 id followed by f64 coefficients[r x n_steps].
void write_coefficients(const pod::CoefficientSet& coeffs, const std::filesystem::path& path);
[[nodiscard]] pod::CoefficientSet read_coefficients(const std::filesystem::path& path);

// contribution.csv: r,c
void write_contribution_csv(const pod::PodBasis& basis, const std::filesystem::path& path);

// step,scenario_id,prob
void write_posterior_log(const bayes::PosteriorState& state, const std::vector<int>& scenario_ids,
                         const std::filesystem::path& path);

void write_prediction_json(const detect::Prediction& pred, const std::filesystem::path& path);

// report.csv columns: fold,scenario_id,method,t_obs,eta_pred,eta_true,H_pred,H_true,TPR,FPR,
// t_arrv,chosen_id,n_TP,n_TN,n_FP,n_FN,status
void write_report_csv(const std::vector<harness::SweepRow>& rows, const std::filesystem::path& path);
[[nodiscard]] std::vector<harness::SweepRow> read_report_csv(const std::filesystem::path& path);

// One row per (method, t_obs) with the seven box statistics of each metric.
void write_boxstats_csv(const std::vector<harness::BoxRow>& box, const std::filesystem::path& path);

// method,t_obs,fold,scenario_id,truth,pred,t_arrv for the given quantity.
enum class ScatterQuantity { Eta, Hmax };
void write_scatter_csv(const std::vector<harness::SweepRow>& rows, ScatterQuantity q, const std::filesystem::path& path);

// Fold bookkeeping: fold,r,basis_input_hash,n_train,n_test
void write_folds_csv(const std::vector<harness::FoldInfo>& folds, const std::filesystem::path& path);

}  // namespace tsudetect::io
