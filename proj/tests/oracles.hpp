#pragma once
// Test-side reference implementations, written without the library's
// internals so that agreement means something.
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline Eigen::MatrixXd centered(const Eigen::MatrixXd& X) {
  return X.colwise() - X.rowwise().mean();
}

// Quadratic form maximised by the fit: (1-l)|WX|^2 - l sum_i |W_i P - W_{i+1} Q|^2,
// with w the row-major flattening of W (L x n).
inline double gain(const Eigen::VectorXd& w, const Eigen::MatrixXd& Xc, double lambda, int L) {
  const Eigen::Index n = Xc.rows(), m = Xc.cols();
  double total = 0.0;
  std::vector<Eigen::RowVectorXd> rows;
  for (int i = 0; i < L; ++i) rows.push_back(w.segment(i * n, n).transpose() * Xc);
  for (int i = 0; i < L; ++i) total += (1.0 - lambda) * rows[i].squaredNorm();
  for (int i = 0; i + 1 < L; ++i) {
    double s = 0.0;
    for (Eigen::Index t = 0; t + 1 < m; ++t) {
      const double d = rows[i](t + 1) - rows[i + 1](t);
      s += d * d;
    }
    total -= lambda * s;
  }
  return total;
}

// H recovered from the quadratic form by polarisation.
inline Eigen::MatrixXd dense_h(const Eigen::MatrixXd& Xc, double lambda, int L) {
  const Eigen::Index N = Xc.rows() * L;
  Eigen::MatrixXd H(N, N);
  std::vector<double> diag(N);
  for (Eigen::Index i = 0; i < N; ++i) diag[i] = gain(Eigen::VectorXd::Unit(N, i), Xc, lambda, L);
  for (Eigen::Index i = 0; i < N; ++i) {
    H(i, i) = diag[i];
    for (Eigen::Index j = i + 1; j < N; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(N, i) + Eigen::VectorXd::Unit(N, j);
      H(i, j) = H(j, i) = 0.5 * (gain(e, Xc, lambda, L) - diag[i] - diag[j]);
    }
  }
  return H;
}

inline double max_eigenvalue(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Loss as a direct loop, for unit-norm W.
inline double loss(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Xc, double lambda) {
  Eigen::VectorXd w(W.size());
  for (Eigen::Index i = 0; i < W.rows(); ++i) w.segment(i * W.cols(), W.cols()) = W.row(i).transpose();
  return -gain(w, Xc, lambda, static_cast<int>(W.rows()));
}

// Fréchet distance by enumerating every monotone coupling from (0,0) to the end.
inline double brute_dfd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index p = a.rows(), q = b.rows();
  double best = std::numeric_limits<double>::infinity();
  std::function<void(Eigen::Index, Eigen::Index, double)> walk = [&](Eigen::Index i, Eigen::Index j, double worst) {
    worst = std::max(worst, (a.row(i) - b.row(j)).norm());
    if (worst >= best) return;
    if (i == p - 1 && j == q - 1) {
      best = worst;
      return;
    }
    if (i + 1 < p) walk(i + 1, j, worst);
    if (j + 1 < q) walk(i, j + 1, worst);
    if (i + 1 < p && j + 1 < q) walk(i + 1, j + 1, worst);
  };
  walk(0, 0, 0.0);
  return best;
}

inline Eigen::MatrixXd zscore(const Eigen::MatrixXd& c) {
  Eigen::MatrixXd out(c.rows(), c.cols());
  for (Eigen::Index k = 0; k < c.cols(); ++k) {
    const double mu = c.col(k).mean();
    double ss = 0.0;
    for (Eigen::Index i = 0; i < c.rows(); ++i) ss += (c(i, k) - mu) * (c(i, k) - mu);
    const double sd = c.rows() > 1 ? std::sqrt(ss / double(c.rows() - 1)) : 0.0;
    for (Eigen::Index i = 0; i < c.rows(); ++i) out(i, k) = sd > 0.0 ? (c(i, k) - mu) / sd : 0.0;
  }
  return out;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd M(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) M(i, j) = g(rng);
  return M;
}

inline Eigen::MatrixXd random_unit(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd M = random_matrix(rng, r, c);
  return M / M.norm();
}

inline Eigen::MatrixXd hankel(const Eigen::VectorXd& z, Eigen::Index L) {
  const Eigen::Index m = z.size() - L + 1;
  Eigen::MatrixXd H(L, m);
  for (Eigen::Index i = 0; i < L; ++i)
    for (Eigen::Index j = 0; j < m; ++j) H(i, j) = z(i + j);
  return H;
}

// Labels by the literal rule, one hour at a time.
enum class Lab { TP, FP, TN, FN };

inline Lab label_of(int t, int decision, std::optional<int> discharge, int horizon, bool itemsFine) {
  if (decision == 1) {
    if (discharge && *discharge >= t && *discharge <= t + horizon) return Lab::TP;
    return itemsFine ? Lab::TP : Lab::FP;
  }
  const bool inIcu = !discharge || t < *discharge;
  return inIcu ? Lab::TN : Lab::FN;
}

}  // namespace oracle
