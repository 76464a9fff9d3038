#include "stpca/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "stpca/error.hpp"

namespace stpca {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool is_blank(const std::string& line) { return trim(line).empty(); }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

double cell_value(const std::string& cell, std::size_t row, std::size_t column) {
  const auto value = parse_double(cell);
  if (!value)
    throw ParseError("non-numeric cell '" + cell + "' at row " + std::to_string(row) + ", column " +
                         std::to_string(column),
                     row, column);
  return *value;
}

struct Table {
  std::vector<std::string> header;
  // (file row, cells)
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

Table read_table(std::istream& in, const std::vector<std::string>& expected, const std::string& what) {
  Table table;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (is_blank(line)) continue;
    if (table.header.empty()) {
      table.header = split(line);
      if (table.header != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw ParseError(what + " header must be '" + want + "'", row, 1);
      }
      continue;
    }
    auto cells = split(line);
    if (cells.size() != expected.size())
      throw ParseError(what + " row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                           " cells, expected " + std::to_string(expected.size()),
                       row, std::min(cells.size(), expected.size()) + 1);
    table.rows.emplace_back(row, std::move(cells));
  }
  if (table.header.empty()) throw ParseError(what + " is empty", 1, 1);
  return table;
}

int integral_hour(const std::string& cell, std::size_t row, std::size_t column) {
  const double value = cell_value(cell, row, column);
  if (value != std::floor(value) || std::abs(value) > 1e9)
    throw ParseError("hour '" + cell + "' at row " + std::to_string(row) + " is not an integer", row, column);
  return static_cast<int>(value);
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

SeriesMatrix read_series_csv(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++row;
    if (!is_blank(line)) header = split(line);
  }
  if (header.empty()) throw InsufficientSamplesError("series CSV has no header");
  const std::size_t m = header.size() - 1;

  std::vector<double> time;
  bool numericTime = m > 0;
  for (std::size_t k = 1; k < header.size() && numericTime; ++k) {
    const auto value = parse_double(header[k]);
    if (value) time.push_back(*value);
    else numericTime = false;
  }
  if (!numericTime) time.clear();

  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
  while (std::getline(in, line)) {
    ++row;
    if (is_blank(line)) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ParseError("ragged row " + std::to_string(row) + ": " + std::to_string(cells.size()) +
                           " cells, header has " + std::to_string(header.size()),
                       row, std::min(cells.size(), header.size()) + 1);
    names.push_back(cells[0]);
    std::vector<double> r(m);
    for (std::size_t k = 0; k < m; ++k) r[k] = cell_value(cells[k + 1], row, k + 2);
    values.push_back(std::move(r));
  }
  if (values.empty()) throw InsufficientSamplesError("series CSV has no data rows");
  if (m < 2) throw InsufficientSamplesError("series CSV needs at least two time columns");

  Eigen::MatrixXd M(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t k = 0; k < m; ++k) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[i][k];
  return SeriesMatrix(std::move(M), std::move(names), std::move(time));
}

SeriesMatrix load_series_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_series_csv(in);
}

void write_series_csv(std::ostream& out, const SeriesMatrix& X) {
  const Eigen::MatrixXd& M = X.values();
  out << "var";
  for (Eigen::Index k = 0; k < M.cols(); ++k) {
    out << ',';
    if (X.timeIndex().empty()) out << 't' << (k + 1);
    else out << format_double(X.timeIndex()[static_cast<std::size_t>(k)]);
  }
  out << '\n';
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    if (X.variableNames().empty()) out << 'v' << (i + 1);
    else out << X.variableNames()[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < M.cols(); ++k) out << ',' << format_double(M(i, k));
    out << '\n';
  }
}

void write_series_csv(const std::filesystem::path& path, const SeriesMatrix& X) {
  auto out = open_output(path);
  write_series_csv(out, X);
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++row;
    if (is_blank(line)) continue;
    const auto cells = split(line);
    if (first) {
      first = false;
      const bool header = std::any_of(cells.begin(), cells.end(), [](const auto& c) { return !parse_double(c); });
      if (header) {
        width = cells.size();
        continue;
      }
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw ParseError("ragged row " + std::to_string(row) + ": expected " + std::to_string(width) + " cells", row,
                       std::min(cells.size(), width) + 1);
    std::vector<double> r(width);
    for (std::size_t k = 0; k < width; ++k) r[k] = cell_value(cells[k], row, k + 1);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw InsufficientSamplesError("matrix CSV has no data rows");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < width; ++k) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return M;
}

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_matrix_csv(in);
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& M, const std::vector<std::string>& header) {
  if (!header.empty()) {
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
  }
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index k = 0; k < M.cols(); ++k) out << (k ? "," : "") << format_double(M(i, k));
    out << '\n';
  }
}

Curve load_curve_csv(const std::filesystem::path& path) { return Curve(load_matrix_csv(path)); }

void write_sweep_csv(std::ostream& out, const FluctuationSweep& sweep) {
  out << "position,fl\n";
  for (std::size_t k = 0; k < sweep.fl.size(); ++k)
    out << format_double(sweep.positions[k]) << ',' << format_double(sweep.fl[k]) << '\n';
}

FluctuationSweep read_sweep_csv(std::istream& in) {
  const Table table = read_table(in, {"position", "fl"}, "sweep CSV");
  FluctuationSweep sweep;
  for (const auto& [row, cells] : table.rows) {
    sweep.positions.push_back(cell_value(cells[0], row, 1));
    const double fl = cell_value(cells[1], row, 2);
    if (!(fl >= 0.0) || !std::isfinite(fl))
      throw InvalidDataError("fluctuation at row " + std::to_string(row) + " must be finite and non-negative");
    sweep.fl.push_back(fl);
  }
  if (sweep.fl.empty()) throw InsufficientSamplesError("sweep CSV has no rows");
  if (sweep.positions.size() > 1) {
    const double stride = sweep.positions[1] - sweep.positions[0];
    if (stride >= 1.0 && stride == std::floor(stride)) sweep.stride = static_cast<int>(stride);
  }
  return sweep;
}

FluctuationSweep load_sweep_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_sweep_csv(in);
}

PatientLoadResult read_patient_records(std::istream& observations, std::istream& boundsIn, std::istream& eventsIn) {
  const Table obs = read_table(observations, {"subject_id", "hour", "indicator", "value"}, "observation CSV");
  const Table bnd = read_table(boundsIn, {"indicator", "lb", "ub"}, "bounds CSV");
  const Table evt = read_table(eventsIn, {"subject_id", "discharge_hour", "outcome"}, "events CSV");

  // subject -> indicator -> hour -> value
  std::map<std::string, std::map<std::string, std::map<int, double>>> data;
  std::set<std::string> indicators;
  for (const auto& [row, cells] : obs.rows) {
    const int hour = integral_hour(cells[1], row, 2);
    if (cells[3].empty()) continue;  // missing measurement
    const double value = cell_value(cells[3], row, 4);
    if (!std::isfinite(value)) throw InvalidDataError("non-finite value at row " + std::to_string(row));
    auto& slot = data[cells[0]][cells[2]];
    if (!slot.emplace(hour, value).second)
      throw InvalidDataError("duplicate observation (" + cells[0] + ", " + std::to_string(hour) + ", " + cells[2] +
                             ") at row " + std::to_string(row));
    indicators.insert(cells[2]);
  }

  std::map<std::string, Bounds> bounds;
  for (const auto& [row, cells] : bnd.rows) {
    if (!indicators.count(cells[0]))
      throw InvalidDataError("bounds row " + std::to_string(row) + " names unknown indicator '" + cells[0] + "'");
    const Bounds b{cell_value(cells[1], row, 2), cell_value(cells[2], row, 3)};
    if (b.lower > b.upper)
      throw InvalidDataError("indicator '" + cells[0] + "' has lb > ub at row " + std::to_string(row));
    if (!bounds.emplace(cells[0], b).second)
      throw InvalidDataError("indicator '" + cells[0] + "' has more than one bounds row");
  }

  std::map<std::string, std::pair<std::optional<int>, std::optional<Outcome>>> events;
  for (const auto& [row, cells] : evt.rows) {
    std::optional<int> discharge;
    if (!cells[1].empty()) discharge = integral_hour(cells[1], row, 2);
    std::optional<Outcome> outcome;
    if (cells[2] == "survived") outcome = Outcome::kSurvived;
    else if (cells[2] == "died") outcome = Outcome::kDied;
    else if (!cells[2].empty())
      throw ParseError("unknown outcome '" + cells[2] + "' at row " + std::to_string(row), row, 3);
    if (!events.emplace(cells[0], std::make_pair(discharge, outcome)).second)
      throw InvalidDataError("subject " + cells[0] + " has more than one events row");
  }

  PatientLoadResult result;
  for (const auto& [subject, perIndicator] : data) {
    std::set<int> hours;
    for (const auto& [name, series] : perIndicator)
      for (const auto& [hour, value] : series) hours.insert(hour);
    if (static_cast<Eigen::Index>(hours.size()) < PatientRecord::kMinTimePoints) {
      result.dropped.push_back({subject, "min time points"});
      continue;
    }
    if (static_cast<Eigen::Index>(perIndicator.size()) < PatientRecord::kMinIndicators) {
      result.dropped.push_back({subject, "min indicators"});
      continue;
    }

    const int first = *hours.begin();
    const int last = *hours.rbegin();
    const Eigen::Index cols = last - first + 1;
    Eigen::MatrixXd M(static_cast<Eigen::Index>(perIndicator.size()), cols);
    std::vector<std::string> names;
    std::map<std::string, Bounds> recordBounds;
    Eigen::Index i = 0;
    for (const auto& [name, series] : perIndicator) {
      names.push_back(name);
      if (auto b = bounds.find(name); b != bounds.end()) recordBounds.emplace(name, b->second);
      // Forward fill, then back fill the leading gap with the first observation.
      std::optional<double> carry;
      for (Eigen::Index k = 0; k < cols; ++k) {
        if (auto it = series.find(first + static_cast<int>(k)); it != series.end()) carry = it->second;
        M(i, k) = carry ? *carry : std::nan("");
      }
      const double firstValue = series.begin()->second;
      for (Eigen::Index k = 0; k < cols && std::isnan(M(i, k)); ++k) M(i, k) = firstValue;
      ++i;
    }
    std::vector<double> grid(static_cast<std::size_t>(cols));
    for (Eigen::Index k = 0; k < cols; ++k) grid[static_cast<std::size_t>(k)] = first + static_cast<double>(k);

    PatientRecord record{subject, SeriesMatrix(std::move(M), std::move(names), std::move(grid)),
                         std::move(recordBounds), std::nullopt, std::nullopt};
    if (auto e = events.find(subject); e != events.end()) {
      record.dischargeHour = e->second.first;
      record.outcome = e->second.second;
    }
    result.records.push_back(std::move(record));
  }
  return result;
}

PatientLoadResult load_patient_records(const std::filesystem::path& observations, const std::filesystem::path& bounds,
                                       const std::filesystem::path& events) {
  auto o = open_input(observations);
  auto b = open_input(bounds);
  auto e = open_input(events);
  return read_patient_records(o, b, e);
}

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : "NaN"; }

void write_metrics_row(std::ostream& out, const std::string& id, const DecisionMetrics& m, const std::string& note) {
  out << id << ',' << m.TP << ',' << m.FP << ',' << m.TN << ',' << m.FN << ',' << optional_cell(m.recall) << ','
      << optional_cell(m.precision) << ',' << optional_cell(m.F1) << ',' << optional_cell(m.ACC) << ','
      << optional_cell(m.FPR) << ',' << note << '\n';
}

}  // namespace

void write_decisions_csv(std::ostream& out, const std::vector<PatientEvaluation>& evaluations) {
  out << "subject_id,hour,idx,itm_flg,decision,label\n";
  for (const auto& e : evaluations)
    for (const auto& o : e.outcomes)
      out << e.subjectId << ',' << o.t << ',' << (std::isnan(o.idx) ? std::string("NaN") : format_double(o.idx))
          << ',' << o.itmFlg << ',' << o.decision << ',' << (o.label ? label_name(*o.label) : "") << '\n';
}

void write_metrics_csv(std::ostream& out, const std::vector<PatientEvaluation>& evaluations) {
  out << "subject_id,TP,FP,TN,FN,recall,precision,f1,acc,fpr,note\n";
  for (const auto& e : evaluations) write_metrics_row(out, e.subjectId, e.metrics, e.skipReason);
  write_metrics_row(out, "ALL", aggregate_metrics(evaluations), "");
}

TippingRule RunConfig::tippingRule() const {
  if (rule == RuleKind::kFoldChange) return foldChange;
  return MeanExceed{};
}

void RunConfig::validate() const {
  if (embedding.L < 2) throw ParameterError("L must be at least 2");
  if (!(embedding.lambda >= 0.0 && embedding.lambda <= 1.0)) throw ParameterError("lambda must lie in [0, 1]");
  if (window.width < embedding.L) throw ParameterError("window width must be at least L");
  if (window.stride < 1) throw ParameterError("stride must be at least 1");
  if (rule == RuleKind::kFoldChange) {
    if (!(foldChange.factor > 0.0)) throw ParameterError("fold-change factor must be positive");
    if (foldChange.baselineLen < 1) throw ParameterError("baseline length must be at least 1");
  }
  if (decision.wl < 1) throw ParameterError("wl must be at least 1");
  if (!(decision.FC > 0.0)) throw ParameterError("FC must be positive");
  if (!decision.selectedItems.empty()) decision.validate();
  for (const auto& p : inputs)
    if (p.empty()) throw ParameterError("input path must not be empty");
}

}  // namespace stpca
