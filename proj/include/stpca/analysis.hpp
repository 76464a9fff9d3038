#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "stpca/core.hpp"
#include "stpca/series.hpp"

namespace stpca {

/// SVD-based projections of a matrix onto its leading singular directions.
struct ProjectionSet {
  /// Full spectrum, non-increasing.
  Eigen::VectorXd singularValues;
  /// Squared singular values over their sum; all zero for a zero matrix.
  Eigen::VectorXd varianceProportions;
  /// Column k: k-th right singular vector read as a time series (top r only).
  Eigen::MatrixXd components;
  /// Column k: matching left singular vector (top r only).
  Eigen::MatrixXd directions;
};

/// SVD of a Hankel matrix Z = U S R; returns the first r columns of R'.
/// Signs follow the max-|entry|-of-U-positive convention.
/// Throws ParameterError unless 1 <= r <= min(L, m).
ProjectionSet hankel_svd_projections(const Eigen::Ref<const Eigen::MatrixXd>& Z, int r);

/// Ordinary PCA of the row-centred series. components holds the top-r
/// principal component scores (m x r), directions the loadings (n x r).
ProjectionSet pca_baseline(const SeriesMatrix& X, int r);

/// Ordered sequence of points; row i is point i.
class Curve {
 public:
  explicit Curve(Eigen::MatrixXd points);

  const Eigen::MatrixXd& points() const noexcept { return points_; }
  Eigen::Index size() const noexcept { return points_.rows(); }
  Eigen::Index dimension() const noexcept { return points_.cols(); }

  Curve negated() const { return Curve(-points_); }

 private:
  Eigen::MatrixXd points_;
};

/// Discrete Frechet distance over monotone couplings (Eiter-Mannila),
/// Euclidean point distance. O(|a| |b|) time, O(|b|) memory.
double discrete_frechet(const Curve& a, const Curve& b);

/// Per-coordinate z-score (sample SD); constant coordinates map to zero.
Curve normalize_curve(const Curve& c);

/// min(DFD(norm a, norm b), DFD(-norm a, norm b)).
double pcfd(const Curve& a, const Curve& b);

struct FluctuationSweep {
  /// Window start column for each entry.
  std::vector<double> positions;
  /// Sample SD of the window's extended latent series.
  std::vector<double> fl;
  int windowWidth = 0;
  int stride = 1;
};

struct SweepOptions {
  EigenOptions eigen;
  /// Parallel workers; 0 runs sequentially.
  unsigned threads = 0;
};

/// Fits stPCA on columns [start, start + windowWidth) for start = 0, stride, ...
/// and records SD(zExtended) per window, in window order.
FluctuationSweep fluctuation_sweep(const SeriesMatrix& X, const EmbeddingConfig& cfg, int windowWidth, int stride,
                                   const SweepOptions& options = {});

/// Flags fl_k > mean(fl).
struct MeanExceed {};

/// Flags fl_k > factor * median(fl_0 .. fl_{baselineLen-1}).
struct FoldChange {
  double factor = 3.0;
  int baselineLen = 5;
};

using TippingRule = std::variant<MeanExceed, FoldChange>;

/// Ascending 0-based indices of flagged windows (possibly empty).
std::vector<std::size_t> detect_tipping(const FluctuationSweep& sweep, const TippingRule& rule = MeanExceed{});

}  // namespace stpca
