#include "stpca/decision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stpca/core.hpp"
#include "stpca/error.hpp"
#include "stpca/parallel.hpp"

namespace stpca {

int PatientRecord::hourAt(Eigen::Index k) const {
  const auto& hours = indicators.timeIndex();
  if (hours.empty()) return static_cast<int>(k);
  return static_cast<int>(hours.at(static_cast<std::size_t>(k)));
}

Eigen::Index PatientRecord::indicatorRow(const std::string& id) const {
  const auto& names = indicators.variableNames();
  const auto it = std::find(names.begin(), names.end(), id);
  if (it == names.end()) throw ParameterError("subject " + subjectId + " has no indicator '" + id + "'");
  return it - names.begin();
}

void validate_record(const PatientRecord& record) {
  if (record.indicators.timePoints() < PatientRecord::kMinTimePoints)
    throw ParameterError("subject " + record.subjectId + " has fewer than 10 time points");
  if (record.indicators.variables() < PatientRecord::kMinIndicators)
    throw ParameterError("subject " + record.subjectId + " has fewer than 5 indicators");
  for (const auto& [id, b] : record.bounds)
    if (b.lower > b.upper) throw ParameterError("indicator " + id + " has lower bound above upper bound");
}

void DecisionConfig::validate() const {
  if (wl < 1) throw ParameterError("window length wl must be at least 1");
  if (!(FC > 0.0)) throw ParameterError("fold-change threshold FC must be positive");
  if (selectedItems.size() < 2 || selectedItems.size() > 5)
    throw ParameterError("between 2 and 5 items must be selected, got " + std::to_string(selectedItems.size()));
}

const char* label_name(Label label) {
  switch (label) {
    case Label::kTP: return "TP";
    case Label::kFP: return "FP";
    case Label::kTN: return "TN";
    case Label::kFN: return "FN";
  }
  return "?";
}

namespace {

// Mean of fl over 1-based positions [last - wl + 1, last].
double trailing_mean(const std::vector<double>& fl, int wl, int last) {
  double sum = 0.0;
  for (int k = last - wl + 1; k <= last; ++k) sum += fl[static_cast<std::size_t>(k - 1)];
  return sum / wl;
}

}  // namespace

double idx_z(const std::vector<double>& fl, int wl, int t) {
  if (wl < 1) throw ParameterError("window length wl must be at least 1");
  if (t > static_cast<int>(fl.size())) throw ParameterError("time " + std::to_string(t) + " beyond fluctuation history");
  if (t <= wl) throw ParameterError("no past window before t=" + std::to_string(t) + " for wl=" + std::to_string(wl));
  const double recent = trailing_mean(fl, wl, t);
  if (!(recent > 0.0)) throw InvalidDataError("recent mean fluctuation is zero at t=" + std::to_string(t));
  double past = -std::numeric_limits<double>::infinity();
  for (int j = wl; j <= t - 1; ++j) past = std::max(past, trailing_mean(fl, wl, j));
  return past / recent;
}

int item_flags(const std::vector<double>& x, const std::vector<Bounds>& bounds) {
  if (x.size() != bounds.size())
    throw ShapeError("item values and bounds differ in length (" + std::to_string(x.size()) + " vs " +
                     std::to_string(bounds.size()) + ")");
  int count = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (bounds[i].lower <= x[i] && x[i] <= bounds[i].upper) ++count;
  return count;
}

DecisionOutcome discharge_decision(const std::vector<double>& fl, const std::vector<double>& x,
                                   const DecisionConfig& cfg, const std::vector<Bounds>& bounds, int t) {
  DecisionOutcome out;
  out.t = t;
  out.idx = idx_z(fl, cfg.wl, t);
  out.itmFlg = item_flags(x, bounds);
  out.decision = (out.idx >= cfg.FC && out.itmFlg == static_cast<int>(bounds.size())) ? 1 : 0;
  return out;
}

DecisionMetrics metrics_from_counts(int TP, int FP, int TN, int FN) {
  DecisionMetrics m;
  m.TP = TP;
  m.FP = FP;
  m.TN = TN;
  m.FN = FN;
  const auto ratio = [](int num, int den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / den;
  };
  m.recall = ratio(TP, TP + FN);
  m.precision = ratio(TP, TP + FP);
  m.ACC = ratio(TP + TN, TP + FP + TN + FN);
  m.FPR = ratio(FP, FP + TN);
  if (m.recall && m.precision && *m.recall + *m.precision > 0.0)
    m.F1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  return m;
}

bool items_in_range_from(const PatientRecord& record, const std::vector<std::string>& selectedItems, int t) {
  const Eigen::MatrixXd& values = record.indicators.values();
  for (const auto& item : selectedItems) {
    const Eigen::Index row = record.indicatorRow(item);
    const auto b = record.bounds.find(item);
    if (b == record.bounds.end()) throw ParameterError("indicator '" + item + "' has no normal range");
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
      if (record.hourAt(k) < t) continue;
      const double v = values(row, k);
      if (v < b->second.lower || v > b->second.upper) return false;
    }
  }
  return true;
}

DecisionMetrics score_decisions(std::vector<DecisionOutcome>& outcomes, const PatientRecord& record,
                                const std::vector<std::string>& selectedItems, int horizon) {
  for (std::size_t k = 1; k < outcomes.size(); ++k)
    if (outcomes[k].t < outcomes[k - 1].t) throw OrderingError("decision outcomes must be sorted by time");
  int TP = 0, FP = 0, TN = 0, FN = 0;
  for (auto& o : outcomes) {
    if (o.decision == 1) {
      const bool dischargedSoon =
          record.dischargeHour && *record.dischargeHour >= o.t && *record.dischargeHour <= o.t + horizon;
      const bool ok = dischargedSoon || items_in_range_from(record, selectedItems, o.t);
      o.label = ok ? Label::kTP : Label::kFP;
      ++(ok ? TP : FP);
    } else {
      const bool inIcu = record.inIcuAt(o.t);
      o.label = inIcu ? Label::kTN : Label::kFN;
      ++(inIcu ? TN : FN);
    }
  }
  return metrics_from_counts(TP, FP, TN, FN);
}

PatientEvaluation evaluate_patient(const PatientRecord& record, const DecisionConfig& cfg,
                                   const EvaluationOptions& options) {
  cfg.validate();
  PatientEvaluation eval;
  eval.subjectId = record.subjectId;

  const Eigen::MatrixXd& values = record.indicators.values();
  const Eigen::Index m = values.cols();
  const int width = std::max(options.embedding.L, cfg.wl);
  if (width > m) {
    eval.skipReason = "record shorter than window width " + std::to_string(width);
    return eval;
  }

  std::vector<Eigen::Index> rows;
  std::vector<Bounds> bounds;
  for (const auto& item : cfg.selectedItems) {
    const auto& names = record.indicators.variableNames();
    const auto it = std::find(names.begin(), names.end(), item);
    const auto b = record.bounds.find(item);
    if (it == names.end() || b == record.bounds.end()) {
      eval.skipReason = "missing indicator or normal range for '" + item + "'";
      return eval;
    }
    rows.push_back(it - names.begin());
    bounds.push_back(b->second);
  }

  for (Eigen::Index k = width - 1; k < m; ++k) {
    const StpcaResult fit = fit_stpca(record.indicators.columns(k - width + 1, width), options.embedding);
    eval.fl.push_back(sample_sd(fit.zExtended));
    eval.flHours.push_back(record.hourAt(k));
  }

  const int steps = static_cast<int>(eval.fl.size());
  for (int t = cfg.wl + 1; t <= steps; ++t) {
    const Eigen::Index column = width - 1 + (t - 1);
    std::vector<double> x;
    for (auto row : rows) x.push_back(values(row, column));
    DecisionOutcome o;
    try {
      o = discharge_decision(eval.fl, x, cfg, bounds, t);
    } catch (const InvalidDataError&) {
      // Flat recent history: the ratio is undefined, so discharge is not affirmed.
      o.idx = std::numeric_limits<double>::quiet_NaN();
      o.itmFlg = item_flags(x, bounds);
      o.decision = 0;
    }
    o.t = eval.flHours[static_cast<std::size_t>(t - 1)];
    eval.outcomes.push_back(o);
  }
  eval.metrics = score_decisions(eval.outcomes, record, cfg.selectedItems, options.horizon);
  return eval;
}

std::vector<PatientEvaluation> evaluate_patients(const std::vector<PatientRecord>& records,
                                                 const DecisionConfig& cfg, const EvaluationOptions& options) {
  std::vector<PatientEvaluation> out(records.size());
  parallel_for(records.size(), options.threads,
               [&](std::size_t i) { out[i] = evaluate_patient(records[i], cfg, options); });
  return out;
}

DecisionMetrics aggregate_metrics(const std::vector<PatientEvaluation>& evaluations) {
  int TP = 0, FP = 0, TN = 0, FN = 0;
  for (const auto& e : evaluations) {
    TP += e.metrics.TP;
    FP += e.metrics.FP;
    TN += e.metrics.TN;
    FN += e.metrics.FN;
  }
  return metrics_from_counts(TP, FP, TN, FN);
}

}  // namespace stpca
