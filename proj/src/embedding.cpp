#include "stpca/embedding.hpp"

#include <cmath>
#include <string>

#include "stpca/error.hpp"

namespace stpca {

Eigen::MatrixXd hankel_from_series(const Eigen::Ref<const Eigen::VectorXd>& z, int L) {
  if (L < 1) throw ShapeError("Hankel matrix needs at least one row");
  if (L > z.size())
    throw ShapeError("series of length " + std::to_string(z.size()) + " is shorter than L=" + std::to_string(L));
  const Eigen::Index cols = z.size() - L + 1;
  Eigen::MatrixXd H(L, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < L; ++i) H(i, j) = z(i + j);
  return H;
}

Eigen::VectorXd extract_latent(const Eigen::Ref<const Eigen::MatrixXd>& Z) {
  if (Z.size() == 0) return Eigen::VectorXd();
  const Eigen::Index rows = Z.rows();
  const Eigen::Index cols = Z.cols();
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(rows + cols - 1);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(rows + cols - 1);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      sums(i + j) += Z(i, j);
      counts(i + j) += 1.0;
    }
  }
  return sums.cwiseQuotient(counts);
}

Eigen::MatrixXd nearest_hankel(const Eigen::Ref<const Eigen::MatrixXd>& Z) {
  if (Z.size() == 0) return Eigen::MatrixXd(Z.rows(), Z.cols());
  return hankel_from_series(extract_latent(Z), static_cast<int>(Z.rows()));
}

double embedding_error(const Eigen::Ref<const Eigen::MatrixXd>& Z) {
  if (!Z.allFinite()) throw InvalidDataError("embedding error of a non-finite matrix");
  return (Z - nearest_hankel(Z)).norm();
}

bool is_hankel(const Eigen::Ref<const Eigen::MatrixXd>& Z, double tol) {
  for (Eigen::Index i = 0; i + 1 < Z.rows(); ++i)
    for (Eigen::Index j = 1; j < Z.cols(); ++j)
      if (std::abs(Z(i, j) - Z(i + 1, j - 1)) > tol) return false;
  return true;
}

}  // namespace stpca
