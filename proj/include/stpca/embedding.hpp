#pragma once

#include <Eigen/Dense>

namespace stpca {

/// L x (|z| - L + 1) Hankel matrix with entry (i, j) = z[i + j].
/// Throws ShapeError when L < 1 or L > |z|.
Eigen::MatrixXd hankel_from_series(const Eigen::Ref<const Eigen::VectorXd>& z, int L);

/// Anti-diagonal means of Z, length rows + cols - 1.
Eigen::VectorXd extract_latent(const Eigen::Ref<const Eigen::MatrixXd>& Z);

/// Frobenius-nearest Hankel matrix: every anti-diagonal replaced by its mean.
Eigen::MatrixXd nearest_hankel(const Eigen::Ref<const Eigen::MatrixXd>& Z);

/// ||Z - nearest_hankel(Z)||_F.
double embedding_error(const Eigen::Ref<const Eigen::MatrixXd>& Z);

/// True when every anti-diagonal is constant to within tol (absolute).
bool is_hankel(const Eigen::Ref<const Eigen::MatrixXd>& Z, double tol = 0.0);

}  // namespace stpca
