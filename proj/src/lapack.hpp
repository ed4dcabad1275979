#pragma once
// Thin LAPACK drivers behind the public eigensolvers. Not installed.

#include <Eigen/Dense>

namespace uscqed::detail {

/// count < 0: all eigenpairs (divide and conquer); otherwise the `count`
/// lowest via MRRR. Throws std::runtime_error if LAPACK reports failure.
void symmetric_eigen(const Eigen::MatrixXd& matrix, Eigen::Index count, bool vectors, Eigen::VectorXd& values,
                     Eigen::MatrixXd& eigenvectors);
void hermitian_eigen(const Eigen::MatrixXcd& matrix, Eigen::Index count, bool vectors, Eigen::VectorXd& values,
                     Eigen::MatrixXcd& eigenvectors);

}  // namespace uscqed::detail
