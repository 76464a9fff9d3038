#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stpca/series.hpp"

namespace stpca {

enum class Outcome { kSurvived, kDied };

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// One ICU stay: indicator rows over a contiguous hourly grid.
struct PatientRecord {
  std::string subjectId;
  /// variableNames are indicator ids, timeIndex holds the hour of each column.
  SeriesMatrix indicators;
  std::map<std::string, Bounds> bounds;
  std::optional<int> dischargeHour;
  std::optional<Outcome> outcome;

  static constexpr Eigen::Index kMinTimePoints = 10;
  static constexpr Eigen::Index kMinIndicators = 5;

  /// In the ICU at hour t: no discharge recorded, or t before discharge.
  bool inIcuAt(int t) const { return !dischargeHour || t < *dischargeHour; }

  /// Hour of column k.
  int hourAt(Eigen::Index k) const;
  /// Row of the named indicator; throws ParameterError when absent.
  Eigen::Index indicatorRow(const std::string& id) const;
};

/// Throws ParameterError on inclusion-rule or bound-order violations.
void validate_record(const PatientRecord& record);

struct DecisionConfig {
  int wl = 5;
  double FC = 2.0;
  std::vector<std::string> selectedItems;

  void validate() const;
};

enum class Label { kTP, kFP, kTN, kFN };

const char* label_name(Label label);

struct DecisionOutcome {
  int t = 0;
  int decision = 0;
  double idx = 0.0;
  int itmFlg = 0;
  std::optional<Label> label;
};

/// max_{j=wl..t-1} mean(fl[j-wl+1..j]) / mean(fl[t-wl+1..t]), 1-based t.
/// Throws ParameterError when t <= wl or t > |fl|, and InvalidDataError when
/// the recent mean is not positive.
double idx_z(const std::vector<double>& fl, int wl, int t);

/// Number of items with lower <= x_i <= upper. Throws ShapeError on length mismatch.
int item_flags(const std::vector<double>& x, const std::vector<Bounds>& bounds);

/// Decision(t) = 1 iff idx_z >= FC and every selected item is in range.
DecisionOutcome discharge_decision(const std::vector<double>& fl, const std::vector<double>& x,
                                   const DecisionConfig& cfg, const std::vector<Bounds>& bounds, int t);

/// Ratio metrics are empty ("no such event") when their denominator is zero.
struct DecisionMetrics {
  int TP = 0;
  int FP = 0;
  int TN = 0;
  int FN = 0;
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> F1;
  std::optional<double> ACC;
  std::optional<double> FPR;

  int total() const { return TP + FP + TN + FN; }
};

DecisionMetrics metrics_from_counts(int TP, int FP, int TN, int FN);

/// Labels each outcome in place and returns the metrics.
/// A positive decision at hour t is TP if discharge happens in [t, t + horizon]
/// or every selected item stays in range from t to the end of the record;
/// otherwise FP. A negative decision is TN while the patient is in the ICU,
/// FN after discharge. Throws OrderingError unless outcomes are sorted by t.
DecisionMetrics score_decisions(std::vector<DecisionOutcome>& outcomes, const PatientRecord& record,
                                const std::vector<std::string>& selectedItems, int horizon = 5);

/// Whether every selected item is inside its bounds for all hours >= t.
bool items_in_range_from(const PatientRecord& record, const std::vector<std::string>& selectedItems, int t);

struct PatientEvaluation {
  std::string subjectId;
  /// Per-hour fluctuation index aligned with hours (empty when too short).
  std::vector<double> fl;
  std::vector<int> flHours;
  std::vector<DecisionOutcome> outcomes;
  DecisionMetrics metrics;
  /// Non-empty when the patient could not be evaluated.
  std::string skipReason;
};

struct EvaluationOptions {
  EmbeddingConfig embedding{3, 0.95, true, false};
  int horizon = 5;
  unsigned threads = 0;
};

/// Fl per hour from trailing windows of width max(L, wl), then a decision for
/// every hour with a full past range, then labels and metrics.
PatientEvaluation evaluate_patient(const PatientRecord& record, const DecisionConfig& cfg,
                                   const EvaluationOptions& options);

std::vector<PatientEvaluation> evaluate_patients(const std::vector<PatientRecord>& records,
                                                 const DecisionConfig& cfg, const EvaluationOptions& options);

/// Pooled counts over evaluated patients.
DecisionMetrics aggregate_metrics(const std::vector<PatientEvaluation>& evaluations);

}  // namespace stpca
