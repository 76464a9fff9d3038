#pragma once

#include <limits>

#include <Eigen/Dense>

#include "stpca/series.hpp"

namespace stpca {

/// The four n x n products that define the block-tridiagonal operator.
/// With P = columns 2..m and Q = columns 1..m-1 of the centred data:
/// Cxx = X X', Cpp = P P', Cqq = Q Q', Cpq = P Q'.
struct GramBlocks {
  Eigen::MatrixXd Cxx;
  Eigen::MatrixXd Cpp;
  Eigen::MatrixXd Cqq;
  Eigen::MatrixXd Cpq;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
};

GramBlocks gram_blocks(const SeriesMatrix& centered);

/// Implicit nL x nL symmetric matrix H(X), never materialised by matvec.
///
/// Diagonal blocks:
///   D_1 = (1-l) Cxx - l Cpp
///   D_i = (1-l) Cxx - l (Cpp + Cqq),  1 < i < L
///   D_L = (1-l) Cxx - l Cqq
/// Super-diagonal blocks l Cpq, sub-diagonal blocks l Cpq'.
///
/// H is the negated Hessian of the stPCA loss, so its largest algebraic
/// eigenpair minimises the loss on the unit sphere. One matvec costs O(L n^2).
class BlockTridiagOperator {
 public:
  BlockTridiagOperator(GramBlocks blocks, double lambda, int L);

  Eigen::Index dimension() const noexcept { return n_ * L_; }
  Eigen::Index blockSize() const noexcept { return n_; }
  int blockCount() const noexcept { return L_; }
  double lambda() const noexcept { return lambda_; }
  const GramBlocks& blocks() const noexcept { return blocks_; }

  /// Diagonal block i, 0-based.
  const Eigen::MatrixXd& diagonalBlock(int i) const;
  /// Super-diagonal block l Cpq (identical for every block row).
  const Eigen::MatrixXd& offDiagonalBlock() const noexcept { return off_; }

  /// out = H v. Throws ShapeError on length mismatch.
  void apply(const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& v) const;

  /// Exact Gershgorin bound on the spectral radius (max absolute row sum).
  double gershgorinBound() const;

  /// Dense H; only allowed while dimension() <= kMaxDenseDimension.
  Eigen::MatrixXd toDense() const;

  static constexpr Eigen::Index kMaxDenseDimension = 400;

 private:
  GramBlocks blocks_;
  double lambda_;
  int L_;
  Eigen::Index n_;
  Eigen::MatrixXd first_;
  Eigen::MatrixXd middle_;
  Eigen::MatrixXd last_;
  Eigen::MatrixXd off_;
};

/// h_matvec: H v.
Eigen::VectorXd h_matvec(const BlockTridiagOperator& op, const Eigen::Ref<const Eigen::VectorXd>& v);

enum class EigenMethod {
  kAuto,     ///< dense for nL <= 400, Lanczos otherwise (dense fallback up to 3000 if it stalls)
  kDense,    ///< Eigen::SelfAdjointEigenSolver on the assembled matrix
  kLanczos,  ///< restarted Lanczos with full reorthogonalisation
  kPower,    ///< power iteration on H + sI, s = Gershgorin bound
};

struct EigenOptions {
  double tol = 1e-10;
  /// Upper bound on operator applications for the iterative methods.
  int maxIter = 10000;
  EigenMethod method = EigenMethod::kAuto;
};

struct EigenPair {
  double alpha = 0.0;
  Eigen::VectorXd vector;
  /// ||H V - alpha V||_2.
  double residual = 0.0;
  int iterations = 0;
  /// Second-largest eigenvalue estimate (NaN when not available).
  double secondEigenvalue = std::numeric_limits<double>::quiet_NaN();
  /// Top two eigenvalues closer than 1e-10 |alpha|.
  bool degenerate = false;
};

/// Largest algebraic eigenvalue of H and a unit eigenvector with
/// ||H V - alpha V|| <= tol * max(1, |alpha|).
/// Throws ConvergenceError (carrying the last residual) after maxIter matvecs.
EigenPair dominant_eigenpair(const BlockTridiagOperator& op, const EigenOptions& options = {});

struct StpcaResult {
  /// L x n, row i is W_i; unit Frobenius norm.
  Eigen::MatrixXd W;
  double alpha = 0.0;
  /// L x m, W times the centred data.
  Eigen::MatrixXd Z;
  /// Length m + L - 1; anti-diagonal means of Z.
  Eigen::VectorXd zExtended;
  double embeddingError = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Top eigenvalue not simple; W is then one of many optimal solutions.
  bool degenerate = false;
  double residual = 0.0;
};

/// Full pipeline: centre, Gram blocks, dominant eigenpair, reshape V row-wise
/// into W, fix the sign, project, extract the latent series.
StpcaResult fit_stpca(const SeriesMatrix& X, const EmbeddingConfig& cfg, const EigenOptions& options = {});

/// Flips v so that its first entry with |value| > 1e-12 is positive.
void apply_sign_convention(Eigen::Ref<Eigen::VectorXd> v);

/// -(1-l) sum_i |W_i X|^2 + l sum_{i<L} |W_i P - W_{i+1} Q|^2 on centred X.
/// Throws ConstraintError when |W|_F deviates from 1 by more than 1e-8.
double objective_value(const Eigen::MatrixXd& W, const SeriesMatrix& centered, double lambda);

}  // namespace stpca
