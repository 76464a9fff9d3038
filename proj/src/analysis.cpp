#include "stpca/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/SVD>

#include "stpca/embedding.hpp"
#include "stpca/error.hpp"
#include "stpca/parallel.hpp"

namespace stpca {

namespace {

ProjectionSet projections_from_svd(const Eigen::Ref<const Eigen::MatrixXd>& M, int r, bool scores) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd U = svd.matrixU();
  Eigen::MatrixXd V = svd.matrixV();
  const Eigen::VectorXd& s = svd.singularValues();

  // Deterministic signs: largest-magnitude entry of each left vector positive.
  for (Eigen::Index k = 0; k < U.cols(); ++k) {
    Eigen::Index arg = 0;
    U.col(k).cwiseAbs().maxCoeff(&arg);
    if (U(arg, k) < 0.0) {
      U.col(k) = -U.col(k);
      V.col(k) = -V.col(k);
    }
  }

  ProjectionSet out;
  out.singularValues = s;
  const double energy = s.squaredNorm();
  out.varianceProportions =
      energy > 0.0 ? Eigen::VectorXd(s.array().square() / energy) : Eigen::VectorXd::Zero(s.size());
  out.directions = U.leftCols(r);
  out.components = V.leftCols(r);
  if (scores) out.components = out.components * s.head(r).asDiagonal();
  return out;
}

}  // namespace

ProjectionSet hankel_svd_projections(const Eigen::Ref<const Eigen::MatrixXd>& Z, int r) {
  const Eigen::Index limit = std::min(Z.rows(), Z.cols());
  if (r < 1 || r > limit)
    throw ParameterError("component count r=" + std::to_string(r) + " outside [1, " + std::to_string(limit) + "]");
  if (!Z.allFinite()) throw InvalidDataError("Hankel matrix contains non-finite values");
  return projections_from_svd(Z, r, false);
}

ProjectionSet pca_baseline(const SeriesMatrix& X, int r) {
  const Eigen::Index limit = std::min(X.variables(), X.timePoints());
  if (r < 1 || r > limit)
    throw ParameterError("component count r=" + std::to_string(r) + " outside [1, " + std::to_string(limit) + "]");
  EmbeddingConfig centering;
  centering.scaleRows = false;
  const SeriesMatrix centered = center_series(X, centering);
  return projections_from_svd(centered.values(), r, true);
}

Curve::Curve(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() < 1) throw ShapeError("curve needs at least one point");
  if (points_.cols() < 1) throw ShapeError("curve points need at least one coordinate");
  if (!points_.allFinite()) throw InvalidDataError("curve contains non-finite values");
}

double discrete_frechet(const Curve& a, const Curve& b) {
  if (a.dimension() != b.dimension())
    throw ShapeError("curves have dimensions " + std::to_string(a.dimension()) + " and " +
                     std::to_string(b.dimension()));
  const Eigen::MatrixXd& A = a.points();
  const Eigen::MatrixXd& B = b.points();
  const Eigen::Index nb = B.rows();
  // row[j] holds c(i, j) for the current i; previous row overwritten in place.
  std::vector<double> row(static_cast<std::size_t>(nb));
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    double diagonal = 0.0;  // c(i-1, j-1)
    for (Eigen::Index j = 0; j < nb; ++j) {
      const double d = (A.row(i) - B.row(j)).norm();
      const auto idx = static_cast<std::size_t>(j);
      double reach;
      if (i == 0 && j == 0) reach = 0.0;
      else if (i == 0) reach = row[idx - 1];
      else if (j == 0) reach = row[idx];
      else reach = std::min({row[idx], diagonal, row[idx - 1]});
      diagonal = row[idx];
      row[idx] = std::max(d, reach);
    }
  }
  return row.back();
}

Curve normalize_curve(const Curve& c) {
  Eigen::MatrixXd out = c.points();
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    auto col = out.col(k);
    const double sd = sample_sd(col);
    if (sd > 0.0 && !(col.array() == col(0)).all()) {
      col.array() -= col.mean();
      col /= sd;
    } else {
      col.setZero();
    }
  }
  return Curve(std::move(out));
}

double pcfd(const Curve& a, const Curve& b) {
  if (a.dimension() != b.dimension())
    throw ShapeError("curves have dimensions " + std::to_string(a.dimension()) + " and " +
                     std::to_string(b.dimension()));
  const Curve na = normalize_curve(a);
  const Curve nb = normalize_curve(b);
  return std::min(discrete_frechet(na, nb), discrete_frechet(na.negated(), nb));
}

FluctuationSweep fluctuation_sweep(const SeriesMatrix& X, const EmbeddingConfig& cfg, int windowWidth, int stride,
                                   const SweepOptions& options) {
  const Eigen::Index m = X.timePoints();
  if (stride < 1) throw ParameterError("stride must be at least 1");
  if (windowWidth > m)
    throw ParameterError("window width " + std::to_string(windowWidth) + " exceeds series length " +
                         std::to_string(m));
  if (windowWidth < cfg.L)
    throw ParameterError("window width " + std::to_string(windowWidth) + " is smaller than L=" +
                         std::to_string(cfg.L));
  cfg.validate(windowWidth);

  const auto count = static_cast<std::size_t>((m - windowWidth) / stride + 1);
  FluctuationSweep sweep;
  sweep.windowWidth = windowWidth;
  sweep.stride = stride;
  sweep.positions.resize(count);
  sweep.fl.resize(count);
  parallel_for(count, options.threads, [&](std::size_t k) {
    const Eigen::Index start = static_cast<Eigen::Index>(k) * stride;
    const StpcaResult fit = fit_stpca(X.columns(start, windowWidth), cfg, options.eigen);
    sweep.positions[k] = static_cast<double>(start);
    sweep.fl[k] = sample_sd(fit.zExtended);
  });
  return sweep;
}

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

std::vector<std::size_t> detect_tipping(const FluctuationSweep& sweep, const TippingRule& rule) {
  const std::vector<double>& fl = sweep.fl;
  if (fl.empty()) throw ParameterError("cannot detect tipping on an empty sweep");
  double threshold = 0.0;
  if (const auto* fold = std::get_if<FoldChange>(&rule)) {
    if (fold->baselineLen < 1 || static_cast<std::size_t>(fold->baselineLen) >= fl.size())
      throw ParameterError("baseline length " + std::to_string(fold->baselineLen) +
                           " must be in [1, sweep length)");
    if (!(fold->factor > 0.0)) throw ParameterError("fold-change factor must be positive");
    threshold = fold->factor * median(std::vector<double>(fl.begin(), fl.begin() + fold->baselineLen));
  } else {
    threshold = std::accumulate(fl.begin(), fl.end(), 0.0) / static_cast<double>(fl.size());
  }
  std::vector<std::size_t> flagged;
  for (std::size_t k = 0; k < fl.size(); ++k)
    if (fl[k] > threshold) flagged.push_back(k);
  return flagged;
}

}  // namespace stpca
