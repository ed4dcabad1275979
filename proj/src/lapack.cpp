#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "lapack.hpp"

namespace uscqed::detail {

namespace {

void check(lapack_int info, const char* routine) {
  if (info != 0) throw std::runtime_error(std::string(routine) + " failed with info = " + std::to_string(info));
}

}  // namespace

void symmetric_eigen(const Eigen::MatrixXd& matrix, Eigen::Index count, bool vectors, Eigen::VectorXd& values,
                     Eigen::MatrixXd& eigenvectors) {
  const lapack_int n = static_cast<lapack_int>(matrix.rows());
  Eigen::MatrixXd a = matrix;
  const char jobz = vectors ? 'V' : 'N';
  if (count < 0 || count >= n) {
    values.resize(n);
    check(LAPACKE_dsyevd(LAPACK_COL_MAJOR, jobz, 'L', n, a.data(), n, values.data()), "dsyevd");
    if (vectors) eigenvectors = std::move(a);
    else eigenvectors.resize(0, 0);
    return;
  }
  const lapack_int k = static_cast<lapack_int>(count);
  lapack_int found = 0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(vectors ? n : 1, vectors ? k : 1);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
  check(LAPACKE_dsyevr(LAPACK_COL_MAJOR, jobz, 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, k, 0.0, &found, w.data(),
                       z.data(), vectors ? n : 1, support.data()),
        "dsyevr");
  values = w.head(found);
  if (vectors) eigenvectors = z.leftCols(found);
  else eigenvectors.resize(0, 0);
}

void hermitian_eigen(const Eigen::MatrixXcd& matrix, Eigen::Index count, bool vectors, Eigen::VectorXd& values,
                     Eigen::MatrixXcd& eigenvectors) {
  const lapack_int n = static_cast<lapack_int>(matrix.rows());
  Eigen::MatrixXcd a = matrix;
  const char jobz = vectors ? 'V' : 'N';
  if (count < 0 || count >= n) {
    values.resize(n);
    check(LAPACKE_zheevd(LAPACK_COL_MAJOR, jobz, 'L', n, a.data(), n, values.data()), "zheevd");
    if (vectors) eigenvectors = std::move(a);
    else eigenvectors.resize(0, 0);
    return;
  }
  const lapack_int k = static_cast<lapack_int>(count);
  lapack_int found = 0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXcd z(vectors ? n : 1, vectors ? k : 1);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
  check(LAPACKE_zheevr(LAPACK_COL_MAJOR, jobz, 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, k, 0.0, &found, w.data(),
                       z.data(), vectors ? n : 1, support.data()),
        "zheevr");
  values = w.head(found);
  if (vectors) eigenvectors = z.leftCols(found);
  else eigenvectors.resize(0, 0);
}

}  // namespace uscqed::detail
