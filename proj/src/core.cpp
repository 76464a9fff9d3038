#include "stpca/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "stpca/embedding.hpp"
#include "stpca/error.hpp"

namespace stpca {

namespace {

// Symmetrise to remove rounding asymmetry of the GEMM kernels.
Eigen::MatrixXd symmetric_product(const Eigen::Ref<const Eigen::MatrixXd>& A) {
  Eigen::MatrixXd C = A * A.transpose();
  return 0.5 * (C + C.transpose());
}

Eigen::VectorXd start_vector(Eigen::Index size) {
  // Fixed seed: the solver must be a pure function of its input.
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = normal(rng);
  return v.normalized();
}

bool is_converged(double residual, double alpha, double tol) {
  return residual <= tol * std::max(1.0, std::abs(alpha));
}

void mark_degeneracy(EigenPair& pair) {
  pair.degenerate = std::isfinite(pair.secondEigenvalue) &&
                    std::abs(pair.alpha - pair.secondEigenvalue) < 1e-10 * std::abs(pair.alpha);
}

Eigen::MatrixXd assemble(const BlockTridiagOperator& op) {
  const Eigen::Index n = op.offDiagonalBlock().rows(), N = op.dimension();
  const int L = static_cast<int>(N / n);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < L; ++i) {
    H.block(i * n, i * n, n, n) = op.diagonalBlock(i);
    if (i + 1 < L) {
      H.block(i * n, (i + 1) * n, n, n) = op.offDiagonalBlock();
      H.block((i + 1) * n, i * n, n, n) = op.offDiagonalBlock().transpose();
    }
  }
  return H;
}

EigenPair dense_eigenpair(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", std::nan(""), 0);
  const Eigen::Index N = H.rows();
  EigenPair pair;
  pair.alpha = solver.eigenvalues()(N - 1);
  pair.vector = solver.eigenvectors().col(N - 1);
  if (N > 1) pair.secondEigenvalue = solver.eigenvalues()(N - 2);
  pair.residual = (H * pair.vector - pair.alpha * pair.vector).norm();
  pair.iterations = 1;
  return pair;
}

EigenPair power_eigenpair(const BlockTridiagOperator& op, const EigenOptions& options) {
  const double shift = op.gershgorinBound();
  Eigen::VectorXd x = start_vector(op.dimension());
  Eigen::VectorXd hx(op.dimension());
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.maxIter; ++it) {
    op.apply(x, hx);
    const double theta = x.dot(hx);
    residual = (hx - theta * x).norm();
    if (is_converged(residual, theta, options.tol)) {
      EigenPair pair;
      pair.alpha = theta;
      pair.vector = x;
      pair.residual = residual;
      pair.iterations = it;
      return pair;
    }
    x = hx + shift * x;
    const double norm = x.norm();
    if (norm == 0.0) break;
    x /= norm;
  }
  throw ConvergenceError("power iteration did not converge in " + std::to_string(options.maxIter) +
                             " iterations (residual " + std::to_string(residual) + ")",
                         residual, options.maxIter);
}

// Thick-restart Lanczos with full reorthogonalisation. The basis is grown by
// Krylov extension up to kBasisSize vectors; on restart the kKeep best Ritz
// vectors are retained together with the residual direction.
EigenPair lanczos_eigenpair(const BlockTridiagOperator& op, const EigenOptions& options) {
  constexpr Eigen::Index kBasisSize = 48;
  constexpr Eigen::Index kKeep = 8;
  const Eigen::Index N = op.dimension();
  const Eigen::Index k = std::min(N, kBasisSize);
  const Eigen::Index keep = std::min(kKeep, k - 1);
  const double scale = op.gershgorinBound();

  EigenPair pair;
  if (scale == 0.0) {
    // H = 0: every unit vector is an eigenvector.
    pair.vector = start_vector(N);
    return pair;
  }
  const double breakdown = 1e-12;

  Eigen::MatrixXd V(N, k);
  Eigen::MatrixXd HV(N, k);
  Eigen::MatrixXd T(k, k);
  Eigen::Index cols = 0;
  Eigen::Index projected = 0;
  int matvecs = 0;
  double residual = std::numeric_limits<double>::infinity();

  // Orthonormalises w against the basis and appends it; false on breakdown.
  auto append = [&](Eigen::VectorXd w) {
    const double before = w.norm();
    if (before == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd coeffs = V.leftCols(cols).transpose() * w;
      w.noalias() -= V.leftCols(cols) * coeffs;
    }
    const double after = w.norm();
    if (after <= breakdown * before) return false;
    V.col(cols) = w / after;
    op.apply(V.col(cols), HV.col(cols));
    ++matvecs;
    ++cols;
    return true;
  };

  append(start_vector(N));
  Eigen::VectorXd y(N), hy(N);
  while (true) {
    bool invariant = false;
    while (cols < k && matvecs < options.maxIter) {
      if (!append(HV.col(cols - 1))) {
        invariant = true;
        break;
      }
    }

    // Only the columns added since the last restart need projecting.
    const Eigen::Index fresh = cols - projected;
    T.block(0, projected, cols, fresh).noalias() = V.leftCols(cols).transpose() * HV.middleCols(projected, fresh);
    T.block(projected, 0, fresh, projected) = T.block(0, projected, projected, fresh).transpose();
    T.block(projected, projected, fresh, fresh) =
        0.5 * (T.block(projected, projected, fresh, fresh) + T.block(projected, projected, fresh, fresh).transpose())
                  .eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(T.topLeftCorner(cols, cols));
    if (ritz.info() != Eigen::Success) break;
    const Eigen::MatrixXd S = ritz.eigenvectors().rightCols(std::min(keep, cols));

    y = V.leftCols(cols) * ritz.eigenvectors().col(cols - 1);
    y.normalize();
    op.apply(y, hy);
    ++matvecs;
    const double rayleigh = y.dot(hy);
    const Eigen::VectorXd r = hy - rayleigh * y;
    residual = r.norm();

    pair.alpha = rayleigh;
    pair.vector = y;
    pair.residual = residual;
    pair.iterations = matvecs;
    pair.secondEigenvalue = cols > 1 ? ritz.eigenvalues()(cols - 2) : std::numeric_limits<double>::quiet_NaN();
    if (is_converged(residual, rayleigh, options.tol)) return pair;
    if (matvecs >= options.maxIter) break;

    // Restart from the retained Ritz vectors plus the residual direction.
    const Eigen::Index kept = S.cols();
    const Eigen::MatrixXd keptV = V.leftCols(cols) * S;
    const Eigen::MatrixXd keptHV = HV.leftCols(cols) * S;
    V.leftCols(kept) = keptV;
    HV.leftCols(kept) = keptHV;
    T.topLeftCorner(kept, kept) = ritz.eigenvalues().tail(kept).asDiagonal();
    cols = kept;
    projected = kept;
    if (!append(r) && !invariant) {
      // Residual already inside the retained space; refresh from y alone.
      cols = 0;
      projected = 0;
      append(y);
    }
  }
  throw ConvergenceError("Lanczos did not converge in " + std::to_string(options.maxIter) +
                             " operator applications (residual " + std::to_string(residual) + ")",
                         residual, matvecs);
}

}  // namespace

GramBlocks gram_blocks(const SeriesMatrix& centered) {
  const Eigen::MatrixXd& X = centered.values();
  const Eigen::Index n = X.rows();
  const Eigen::Index m = X.cols();
  if (m < 2) throw InsufficientSamplesError("Gram blocks need at least two time points");
  const auto P = X.rightCols(m - 1);
  const auto Q = X.leftCols(m - 1);
  GramBlocks g;
  g.Cxx = symmetric_product(X);
  g.Cpp = symmetric_product(P);
  g.Cqq = symmetric_product(Q);
  g.Cpq = P * Q.transpose();
  g.n = n;
  g.m = m;
  return g;
}

BlockTridiagOperator::BlockTridiagOperator(GramBlocks blocks, double lambda, int L)
    : blocks_(std::move(blocks)), lambda_(lambda), L_(L), n_(blocks_.n) {
  if (L_ < 2) throw ParameterError("operator needs at least two blocks");
  if (!(lambda_ >= 0.0 && lambda_ <= 1.0)) throw ParameterError("lambda must lie in [0, 1]");
  const auto check = [this](const Eigen::MatrixXd& M, const char* name) {
    if (M.rows() != n_ || M.cols() != n_) throw ShapeError(std::string("Gram block ") + name + " is not n x n");
    if (!M.allFinite()) throw InvalidDataError(std::string("Gram block ") + name + " is not finite");
  };
  check(blocks_.Cxx, "Cxx");
  check(blocks_.Cpp, "Cpp");
  check(blocks_.Cqq, "Cqq");
  check(blocks_.Cpq, "Cpq");

  const Eigen::MatrixXd variance = (1.0 - lambda_) * blocks_.Cxx;
  first_ = variance - lambda_ * blocks_.Cpp;
  last_ = variance - lambda_ * blocks_.Cqq;
  middle_ = variance - lambda_ * (blocks_.Cpp + blocks_.Cqq);
  off_ = lambda_ * blocks_.Cpq;
}

const Eigen::MatrixXd& BlockTridiagOperator::diagonalBlock(int i) const {
  if (i < 0 || i >= L_) throw ShapeError("block index out of range");
  if (i == 0) return first_;
  if (i == L_ - 1) return last_;
  return middle_;
}

void BlockTridiagOperator::apply(const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Ref<Eigen::VectorXd> out) const {
  if (v.size() != dimension() || out.size() != dimension())
    throw ShapeError("operator expects vectors of length " + std::to_string(dimension()));
  for (int i = 0; i < L_; ++i) {
    auto block = out.segment(i * n_, n_);
    block.noalias() = diagonalBlock(i) * v.segment(i * n_, n_);
    if (i + 1 < L_) block.noalias() += off_ * v.segment((i + 1) * n_, n_);
    if (i > 0) block.noalias() += off_.transpose() * v.segment((i - 1) * n_, n_);
  }
}

Eigen::VectorXd BlockTridiagOperator::apply(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  Eigen::VectorXd out(dimension());
  apply(v, out);
  return out;
}

double BlockTridiagOperator::gershgorinBound() const {
  const Eigen::VectorXd offRows = off_.cwiseAbs().rowwise().sum();
  const Eigen::VectorXd offCols = off_.cwiseAbs().colwise().sum().transpose();
  double bound = 0.0;
  for (int i = 0; i < L_; ++i) {
    Eigen::VectorXd rows = diagonalBlock(i).cwiseAbs().rowwise().sum();
    if (i + 1 < L_) rows += offRows;
    if (i > 0) rows += offCols;
    bound = std::max(bound, rows.maxCoeff());
  }
  return bound;
}

Eigen::MatrixXd BlockTridiagOperator::toDense() const {
  if (dimension() > kMaxDenseDimension)
    throw ParameterError("refusing to assemble a dense operator of dimension " + std::to_string(dimension()));
  return assemble(*this);
}

Eigen::VectorXd h_matvec(const BlockTridiagOperator& op, const Eigen::Ref<const Eigen::VectorXd>& v) {
  return op.apply(v);
}

void apply_sign_convention(Eigen::Ref<Eigen::VectorXd> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

constexpr Eigen::Index kMaxFallbackDimension = 3000;

EigenPair dominant_eigenpair(const BlockTridiagOperator& op, const EigenOptions& options) {
  if (!(options.tol > 0.0)) throw ParameterError("eigen tolerance must be positive");
  if (options.maxIter < 1) throw ParameterError("maxIter must be positive");
  EigenMethod method = options.method;
  if (method == EigenMethod::kAuto)
    method = op.dimension() <= BlockTridiagOperator::kMaxDenseDimension ? EigenMethod::kDense : EigenMethod::kLanczos;

  EigenPair pair;
  switch (method) {
    case EigenMethod::kDense:
      pair = dense_eigenpair(op.toDense());
      break;
    case EigenMethod::kPower:
      pair = power_eigenpair(op, options);
      break;
    default:
      try {
        pair = lanczos_eigenpair(op, options);
      } catch (const ConvergenceError&) {
        // tight clusters at the top of the spectrum can stall the restarts
        if (options.method != EigenMethod::kAuto || op.dimension() > kMaxFallbackDimension) throw;
        pair = dense_eigenpair(assemble(op));
      }
      break;
  }
  apply_sign_convention(pair.vector);
  mark_degeneracy(pair);
  return pair;
}

StpcaResult fit_stpca(const SeriesMatrix& X, const EmbeddingConfig& cfg, const EigenOptions& options) {
  cfg.validate(X.timePoints());
  const SeriesMatrix centered = center_series(X, cfg);
  const Eigen::Index n = X.variables();
  BlockTridiagOperator op(gram_blocks(centered), cfg.lambda, cfg.L);
  EigenPair pair = dominant_eigenpair(op, options);

  StpcaResult result;
  result.W.resize(cfg.L, n);
  for (int i = 0; i < cfg.L; ++i) result.W.row(i) = pair.vector.segment(i * n, n).transpose();
  result.alpha = pair.alpha;
  result.Z = result.W * centered.values();
  result.zExtended = extract_latent(result.Z);
  result.embeddingError = embedding_error(result.Z);
  result.iterations = pair.iterations;
  result.converged = true;
  result.degenerate = pair.degenerate;
  result.residual = pair.residual;
  return result;
}

double objective_value(const Eigen::MatrixXd& W, const SeriesMatrix& centered, double lambda) {
  const Eigen::MatrixXd& X = centered.values();
  if (W.cols() != X.rows()) throw ShapeError("W must have one column per variable");
  if (W.rows() < 1) throw ShapeError("W must have at least one row");
  if (std::abs(W.norm() - 1.0) > 1e-8) throw ConstraintError("W must have unit Frobenius norm");
  const Eigen::MatrixXd Z = W * X;
  const Eigen::Index m = X.cols();
  double hankelPenalty = 0.0;
  for (Eigen::Index i = 0; i + 1 < Z.rows(); ++i)
    hankelPenalty += (Z.row(i).tail(m - 1) - Z.row(i + 1).head(m - 1)).squaredNorm();
  return -(1.0 - lambda) * Z.squaredNorm() + lambda * hankelPenalty;
}

}  // namespace stpca
