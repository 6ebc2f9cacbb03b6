#include "tsudetect/report_io.hpp"

#include "tsudetect/database_io.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tsudetect::io {
namespace fs = std::filesystem;

namespace {

constexpr char kBasisMagic[8] = {'T', 'S', 'D', 'P', 'O', 'D', 'B', '1'};
constexpr char kCoeffMagic[8] = {'T', 'S', 'D', 'P', 'O', 'D', 'C', '1'};

class BinWriter {
 public:
  explicit BinWriter(const fs::path& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  }
  void magic(const char (&m)[8]) { out_.write(m, 8); }
  void u64(std::uint64_t v) { raw(v); }
  void i64(std::int64_t v) { raw(static_cast<std::uint64_t>(v)); }
  void f64(double v) { raw(std::bit_cast<std::uint64_t>(v)); }
  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failed for " + path_.string());
  }

 private:
  void raw(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out_.write(reinterpret_cast<const char*>(b), 8);
  }
  std::ofstream out_;
  fs::path path_;
};

class BinReader {
 public:
  explicit BinReader(const fs::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IoError("cannot open " + path.string());
  }
  void expect_magic(const char (&m)[8]) {
    char buf[8];
    in_.read(buf, 8);
    if (!in_ || std::memcmp(buf, m, 8) != 0) throw IoError(path_.string() + ": bad magic");
  }
  std::uint64_t u64() { return raw(); }
  std::int64_t i64() { return static_cast<std::int64_t>(raw()); }
  double f64() { return std::bit_cast<double>(raw()); }

 private:
  std::uint64_t raw() {
    unsigned char b[8];
    in_.read(reinterpret_cast<char*>(b), 8);
    if (!in_) throw IoError(path_.string() + ": truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::ifstream in_;
  fs::path path_;
};

std::ofstream open_text(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_num(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError("report: cannot parse number '" + s + "'");
  return v;
}

long long parse_int(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError("report: cannot parse integer '" + s + "'");
  return v;
}

// Status text must not contain separators.
std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

constexpr const char* kReportHeader =
    "fold,scenario_id,method,t_obs,eta_pred,eta_true,H_pred,H_true,TPR,FPR,t_arrv,chosen_id,n_TP,n_TN,n_FP,n_FN,status";

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";  // folds -0 too
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

void write_basis(const pod::PodBasis& basis, const fs::path& path) {
  BinWriter w(path);
  const auto n = basis.n_gauges();
  w.magic(kBasisMagic);
  w.u64(n);
  w.u64(basis.r);
  for (double l : basis.eigenvalues) w.f64(l);
  for (double c : basis.contribution) w.f64(c);
  for (Eigen::Index i = 0; i < basis.modes.rows(); ++i)
    for (Eigen::Index j = 0; j < basis.modes.cols(); ++j) w.f64(basis.modes(i, j));
  for (Eigen::Index i = 0; i < basis.pseudoinverse.rows(); ++i)
    for (Eigen::Index j = 0; j < basis.pseudoinverse.cols(); ++j) w.f64(basis.pseudoinverse(i, j));
  w.finish();
}

pod::PodBasis read_basis(const fs::path& path) {
  BinReader rd(path);
  rd.expect_magic(kBasisMagic);
  const auto n = static_cast<Eigen::Index>(rd.u64());
  const auto r = static_cast<Eigen::Index>(rd.u64());
  if (n <= 0 || r <= 0 || r > n || n > 1'000'000) throw IoError(path.string() + ": implausible basis shape");
  pod::PodBasis b;
  b.r = static_cast<std::size_t>(r);
  b.eigenvalues.resize(static_cast<std::size_t>(n));
  b.contribution.resize(static_cast<std::size_t>(n));
  for (auto& l : b.eigenvalues) l = rd.f64();
  for (auto& c : b.contribution) c = rd.f64();
  b.modes.resize(n, r);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < r; ++j) b.modes(i, j) = rd.f64();
  b.pseudoinverse.resize(r, n);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b.pseudoinverse(i, j) = rd.f64();
  return b;
}

void write_coefficients(const pod::CoefficientSet& coeffs, const fs::path& path) {
  BinWriter w(path);
  w.magic(kCoeffMagic);
  const std::uint64_t r = coeffs.coefficients.empty() ? 0 : static_cast<std::uint64_t>(coeffs.coefficients.front().rows());
  w.u64(coeffs.size());
  w.u64(r);
  w.u64(coeffs.n_steps());
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    w.i64(coeffs.scenario_ids[j]);
    const auto& c = coeffs.coefficients[j];
    for (Eigen::Index i = 0; i < c.rows(); ++i)
      for (Eigen::Index m = 0; m < c.cols(); ++m) w.f64(c(i, m));
  }
  w.finish();
}

pod::CoefficientSet read_coefficients(const fs::path& path) {
  BinReader rd(path);
  rd.expect_magic(kCoeffMagic);
  const auto n = rd.u64();
  const auto r = static_cast<Eigen::Index>(rd.u64());
  const auto steps = static_cast<Eigen::Index>(rd.u64());
  pod::CoefficientSet set;
  for (std::uint64_t j = 0; j < n; ++j) {
    set.scenario_ids.push_back(static_cast<int>(rd.i64()));
    Matrix c(r, steps);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index m = 0; m < steps; ++m) c(i, m) = rd.f64();
    set.coefficients.push_back(std::move(c));
  }
  return set;
}

void write_contribution_csv(const pod::PodBasis& basis, const fs::path& path) {
  auto out = open_text(path);
  out << "r,c\n";
  for (std::size_t i = 0; i < basis.contribution.size(); ++i) out << (i + 1) << ',' << format_number(basis.contribution[i]) << '\n';
}

void write_posterior_log(const bayes::PosteriorState& state, const std::vector<int>& scenario_ids, const fs::path& path) {
  if (!state.history) throw ArgumentError("posterior log requested but history was not kept");
  auto out = open_text(path);
  out << "step,scenario_id,prob\n";
  for (std::size_t s = 0; s < state.history->size(); ++s) {
    const auto& probs = (*state.history)[s];
    for (std::size_t j = 0; j < probs.size(); ++j) {
      out << (s + 1) << ',' << scenario_ids.at(j) << ',' << format_number(probs[j]) << '\n';
    }
  }
}

void write_prediction_json(const detect::Prediction& pred, const fs::path& path) {
  nlohmann::ordered_json j;
  j["method"] = std::string(detect::method_name(pred.method));
  j["t_obs"] = pred.t_obs;
  j["target_gauge"] = pred.target_gauge;
  j["eta_max"] = pred.eta_max;
  j["H_max"] = pred.h_max;
  j["chosen_id"] = pred.chosen_id ? nlohmann::ordered_json(*pred.chosen_id) : nlohmann::ordered_json(nullptr);
  j["grid"] = {{"nx", pred.inundation.nx}, {"ny", pred.inundation.ny}, {"file", "inundation.bin"}};
  auto out = open_text(path);
  out << j.dump(2) << '\n';
}

void write_report_csv(const std::vector<harness::SweepRow>& rows, const fs::path& path) {
  auto out = open_text(path);
  out << kReportHeader << '\n';
  for (const auto& r : rows) {
    out << r.fold << ',' << r.scenario_id << ',' << detect::method_name(r.method) << ',' << format_number(r.t_obs) << ','
        << format_number(r.eta_pred) << ',' << format_number(r.eta_true) << ',' << format_number(r.h_pred) << ','
        << format_number(r.h_true) << ',' << format_number(r.tpr) << ',' << format_number(r.fpr) << ','
        << (r.t_arrv ? format_number(*r.t_arrv) : std::string()) << ','
        << (r.chosen_id ? std::to_string(*r.chosen_id) : std::string()) << ',' << r.counts.tp << ',' << r.counts.tn
        << ',' << r.counts.fp << ',' << r.counts.fn << ',' << (r.ok() ? std::string("ok") : sanitize(r.error)) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<harness::SweepRow> read_report_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) throw IoError(path.string() + ": unexpected report header");
  std::vector<harness::SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 17) throw IoError(path.string() + ": malformed report row");
    harness::SweepRow r;
    r.fold = static_cast<std::size_t>(parse_int(c[0]));
    r.scenario_id = static_cast<int>(parse_int(c[1]));
    r.method = detect::parse_method(c[2]);
    r.t_obs = parse_num(c[3]);
    r.eta_pred = parse_num(c[4]);
    r.eta_true = parse_num(c[5]);
    r.h_pred = parse_num(c[6]);
    r.h_true = parse_num(c[7]);
    r.tpr = parse_num(c[8]);
    r.fpr = parse_num(c[9]);
    if (!c[10].empty()) r.t_arrv = parse_num(c[10]);
    if (!c[11].empty()) r.chosen_id = static_cast<int>(parse_int(c[11]));
    r.counts = {static_cast<std::uint64_t>(parse_int(c[12])), static_cast<std::uint64_t>(parse_int(c[13])),
                static_cast<std::uint64_t>(parse_int(c[14])), static_cast<std::uint64_t>(parse_int(c[15]))};
    if (c[16] != "ok") r.error = c[16].empty() ? "failed" : c[16];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_boxstats_csv(const std::vector<harness::BoxRow>& box, const fs::path& path) {
  auto out = open_text(path);
  out << "method,t_obs,n";
  for (const char* metric : {"eta_err", "H_err", "TPR", "FPR"}) {
    for (const char* stat : {"mean", "median", "q1", "q3", "iqr", "min", "max"}) out << ',' << metric << '_' << stat;
  }
  out << '\n';
  for (const auto& b : box) {
    out << detect::method_name(b.method) << ',' << format_number(b.t_obs) << ',' << b.eta_error.count;
    for (const auto* s : {&b.eta_error, &b.h_error, &b.tpr, &b.fpr}) {
      for (double v : {s->mean, s->median, s->q1, s->q3, s->iqr, s->min, s->max}) out << ',' << format_number(v);
    }
    out << '\n';
  }
}

void write_scatter_csv(const std::vector<harness::SweepRow>& rows, ScatterQuantity q, const fs::path& path) {
  auto out = open_text(path);
  out << "method,t_obs,fold,scenario_id,truth,pred,t_arrv\n";
  for (const auto& r : rows) {
    if (!r.ok()) continue;
    const double truth = q == ScatterQuantity::Eta ? r.eta_true : r.h_true;
    const double pred = q == ScatterQuantity::Eta ? r.eta_pred : r.h_pred;
    out << detect::method_name(r.method) << ',' << format_number(r.t_obs) << ',' << r.fold << ',' << r.scenario_id << ','
        << format_number(truth) << ',' << format_number(pred) << ','
        << (r.t_arrv ? format_number(*r.t_arrv) : std::string()) << '\n';
  }
}

void write_folds_csv(const std::vector<harness::FoldInfo>& folds, const fs::path& path) {
  auto out = open_text(path);
  out << "fold,r,basis_input_hash,n_train,n_test\n";
  for (const auto& f : folds) {
    out << f.fold << ',' << f.r << ',' << f.basis_input_hash << ',' << f.train_ids.size() << ',' << f.test_ids.size()
        << '\n';
  }
}

}  // namespace tsudetect::io
