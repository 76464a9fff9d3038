#include "stpca/series.hpp"

#include <cmath>
#include <string>

#include "stpca/error.hpp"

namespace stpca {

SeriesMatrix::SeriesMatrix(Eigen::MatrixXd values, std::vector<std::string> variableNames,
                           std::vector<double> timeIndex)
    : values_(std::move(values)), names_(std::move(variableNames)), time_(std::move(timeIndex)) {
  if (values_.rows() < 1) throw InsufficientSamplesError("series needs at least one variable");
  if (values_.cols() < 2) throw InsufficientSamplesError("series needs at least two time points");
  if (!values_.allFinite()) throw InvalidDataError("series contains non-finite values");
  if (!names_.empty() && static_cast<Eigen::Index>(names_.size()) != values_.rows())
    throw ShapeError("expected " + std::to_string(values_.rows()) + " variable names, got " +
                     std::to_string(names_.size()));
  if (!time_.empty()) {
    if (static_cast<Eigen::Index>(time_.size()) != values_.cols())
      throw ShapeError("expected " + std::to_string(values_.cols()) + " timestamps, got " +
                       std::to_string(time_.size()));
    for (std::size_t k = 1; k < time_.size(); ++k)
      if (!(time_[k] > time_[k - 1])) throw InvalidDataError("time index must be strictly increasing");
  }
}

SeriesMatrix SeriesMatrix::columns(Eigen::Index first, Eigen::Index count) const {
  if (first < 0 || count < 0 || first + count > values_.cols())
    throw ShapeError("column range out of bounds");
  std::vector<double> time;
  if (!time_.empty()) time.assign(time_.begin() + first, time_.begin() + first + count);
  return SeriesMatrix(values_.middleCols(first, count), names_, std::move(time));
}

SeriesMatrix SeriesMatrix::withValues(Eigen::MatrixXd values) const {
  return SeriesMatrix(std::move(values), names_, time_);
}

void EmbeddingConfig::validate(Eigen::Index m) const {
  if (L < 2) throw ParameterError("embedding dimension L must be at least 2");
  if (L > m)
    throw ParameterError("embedding dimension L=" + std::to_string(L) + " exceeds the " + std::to_string(m) +
                         " available time points");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in [0, 1]");
}

double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& values) {
  const Eigen::Index count = values.size();
  if (count < 2) return 0.0;
  const double mean = values.mean();
  return std::sqrt((values.array() - mean).square().sum() / static_cast<double>(count - 1));
}

SeriesMatrix center_series(const SeriesMatrix& X, const EmbeddingConfig& cfg) {
  Eigen::MatrixXd out = X.values();
  if (!out.allFinite()) throw InvalidDataError("series contains non-finite values");
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    const bool constant = (row.array() == row(0)).all();
    if (constant) {
      if (cfg.centerRows) row.setZero();
      continue;
    }
    if (cfg.centerRows) row.array() -= row.mean();
    if (cfg.scaleRows) {
      const double sd = sample_sd(row.transpose());
      if (sd > 0.0) row /= sd;
    }
  }
  return X.withValues(std::move(out));
}

}  // namespace stpca
