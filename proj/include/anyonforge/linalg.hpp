#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "anyonforge/error.hpp"

namespace anyonforge {

using cplx = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace linalg {

/// Null space of `m` by SVD. Singular values below `cutoff` count as zero.
/// Values inside [cutoff * 1e-2, cutoff * 1e2] make the rank ambiguous and
/// raise NumericalError instead of guessing.
inline std::vector<VectorXc> null_space(const MatrixXc &m, double cutoff) {
  const Eigen::Index n = m.cols();
  std::vector<VectorXc> out;
  if (n == 0)
    return out;
  if (m.rows() == 0) {
    for (Eigen::Index i = 0; i < n; ++i)
      out.push_back(VectorXc::Unit(n, i));
    return out;
  }
  // null(m) == null(R) for m = QR; the SVD then runs on an n x n factor.
  MatrixXc r;
  if (m.rows() > n) {
    Eigen::HouseholderQR<MatrixXc> qr(m);
    r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  } else {
    r = m;
  }
  Eigen::JacobiSVD<MatrixXc> svd(r, Eigen::ComputeFullV);
  const auto &s = svd.singularValues();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sv = i < s.size() ? s(i) : 0.0;
    if (sv > cutoff * 1e-2 && sv < cutoff * 1e2)
      throw NumericalError("null space: singular value " + std::to_string(sv) +
                           " too close to cutoff " + std::to_string(cutoff));
    if (sv < cutoff)
      out.push_back(svd.matrixV().col(i));
  }
  return out;
}

inline double max_abs(const MatrixXc &m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double unitarity_residual(const MatrixXc &u) {
  if (u.rows() != u.cols())
    return std::numeric_limits<double>::infinity();
  return max_abs(u * u.adjoint() - MatrixXc::Identity(u.rows(), u.rows()));
}

} // namespace linalg
} // namespace anyonforge
