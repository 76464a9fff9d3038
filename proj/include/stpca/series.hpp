#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stpca {

/// n variables (rows) by m time points (columns) of finite observations.
///
/// Construction validates the invariants: every entry finite, n >= 1, m >= 2,
/// label/timestamp lengths matching the matrix, timestamps strictly increasing.
class SeriesMatrix {
 public:
  explicit SeriesMatrix(Eigen::MatrixXd values,
                        std::vector<std::string> variableNames = {},
                        std::vector<double> timeIndex = {});

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::Index variables() const noexcept { return values_.rows(); }
  Eigen::Index timePoints() const noexcept { return values_.cols(); }

  /// Empty when the series carries no labels.
  const std::vector<std::string>& variableNames() const noexcept { return names_; }
  const std::vector<double>& timeIndex() const noexcept { return time_; }

  /// Columns [first, first + count) as a new series, labels carried over.
  SeriesMatrix columns(Eigen::Index first, Eigen::Index count) const;

  SeriesMatrix withValues(Eigen::MatrixXd values) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
  std::vector<double> time_;
};

struct EmbeddingConfig {
  int L = 20;
  double lambda = 0.95;
  bool centerRows = true;
  bool scaleRows = false;

  /// Throws ParameterError unless 2 <= L <= m and 0 <= lambda <= 1.
  void validate(Eigen::Index m) const;
};

/// Row-centres X (and optionally scales rows to unit sample SD). Constant rows
/// become zero. Throws InvalidDataError on non-finite input.
SeriesMatrix center_series(const SeriesMatrix& X, const EmbeddingConfig& cfg);

/// Sample standard deviation (divisor size - 1); zero for fewer than two values.
double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& values);

}  // namespace stpca
