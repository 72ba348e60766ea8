#include "ks/linalg.hpp"

#include <cmath>
#include <limits>

namespace ks::linalg {

double condition_number(const CMatrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

CMatrix checked_inverse(const CMatrix& m, double* cond) {
  const double c = condition_number(m);
  if (cond) *cond = c;
  if (!(c <= kSingularCondition)) {
    throw Error(ErrorKind::SingularDenominator,
                "denominator matrix is numerically singular (condition " +
                    std::to_string(c) + ")");
  }
  if (m.size() == 0) return CMatrix(0, 0);
  Eigen::FullPivLU<CMatrix> lu(m);
  return lu.inverse();
}

cplx log_determinant(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::FullPivLU<CMatrix> lu(m);
  const CMatrix& packed = lu.matrixLU();
  cplx acc = 0.0;
  for (Eigen::Index i = 0; i < packed.rows(); ++i) acc += std::log(packed(i, i));
  const double sign = static_cast<double>(lu.permutationP().determinant() *
                                          lu.permutationQ().determinant());
  if (sign < 0) acc += cplx(0.0, pi);
  return acc;
}

cplx determinant(const CMatrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::FullPivLU<CMatrix> lu(m);
  return lu.determinant();
}

double hermitian_defect(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void symmetrize(CMatrix& m) {
  CMatrix t = m.transpose();
  m = 0.5 * (m + t);
}

bool is_real(const CMatrix& m, double tol) {
  if (m.size() == 0) return true;
  return m.imag().cwiseAbs().maxCoeff() <= tol;
}

}  // namespace ks::linalg
