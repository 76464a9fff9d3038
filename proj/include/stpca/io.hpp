#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "stpca/analysis.hpp"
#include "stpca/decision.hpp"
#include "stpca/series.hpp"

namespace stpca {

/// %.17g: enough digits for any double to survive a write/parse round trip.
std::string format_double(double value);

/// Strict full-string parse; empty optional on failure.
std::optional<double> parse_double(std::string_view text);

/// Wide format: header `var,t1,t2,...`, then one row per variable.
/// Numeric header cells become the time index.
SeriesMatrix load_series_csv(const std::filesystem::path& path);
SeriesMatrix read_series_csv(std::istream& in);
void write_series_csv(std::ostream& out, const SeriesMatrix& X);
void write_series_csv(const std::filesystem::path& path, const SeriesMatrix& X);

/// Unlabelled numeric matrix, optional non-numeric header line.
Eigen::MatrixXd read_matrix_csv(std::istream& in);
Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& M, const std::vector<std::string>& header = {});

/// One point per row, one column per coordinate.
Curve load_curve_csv(const std::filesystem::path& path);

/// `position,fl`.
void write_sweep_csv(std::ostream& out, const FluctuationSweep& sweep);
FluctuationSweep read_sweep_csv(std::istream& in);
FluctuationSweep load_sweep_csv(const std::filesystem::path& path);

struct DroppedSubject {
  std::string subjectId;
  std::string reason;
};

struct PatientLoadResult {
  std::vector<PatientRecord> records;
  std::vector<DroppedSubject> dropped;
};

/// Long format `subject_id,hour,indicator,value`, plus `indicator,lb,ub`
/// bounds and `subject_id,discharge_hour,outcome` events. Each subject is
/// pivoted onto the hours min..max; gaps are forward- then back-filled.
/// Subjects with fewer than 10 observed hours or 5 indicators are dropped.
PatientLoadResult load_patient_records(const std::filesystem::path& observations,
                                       const std::filesystem::path& bounds,
                                       const std::filesystem::path& events);
PatientLoadResult read_patient_records(std::istream& observations, std::istream& bounds, std::istream& events);

/// `subject_id,hour,idx,itm_flg,decision,label`.
void write_decisions_csv(std::ostream& out, const std::vector<PatientEvaluation>& evaluations);
/// Per-subject rows plus a final `ALL` row; empty ratios print as NaN.
void write_metrics_csv(std::ostream& out, const std::vector<PatientEvaluation>& evaluations);

struct WindowConfig {
  int width = 50;
  int stride = 1;
};

enum class RuleKind { kMeanExceed, kFoldChange };

struct RunConfig {
  EmbeddingConfig embedding;
  WindowConfig window;
  RuleKind rule = RuleKind::kMeanExceed;
  FoldChange foldChange;
  DecisionConfig decision;
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path output;

  TippingRule tippingRule() const;
  /// Throws ParameterError on any invalid sub-configuration or empty path.
  void validate() const;
};

}  // namespace stpca
