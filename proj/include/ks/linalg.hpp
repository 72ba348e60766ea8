#pragma once

#include "ks/common.hpp"

namespace ks::linalg {

/// 2-norm condition number from singular values. Returns +inf for a
/// matrix with a zero singular value and 1 for an empty matrix.
double condition_number(const CMatrix& m);

/// Inverse through a fully pivoted LU factorisation. Throws
/// SingularDenominator when the condition number exceeds
/// kSingularCondition; `cond` receives the estimate either way.
CMatrix checked_inverse(const CMatrix& m, double* cond = nullptr);

/// Sum of logs of the LU pivots plus the permutation sign; a valid complex
/// logarithm of det(m) that cannot overflow. Empty matrix gives 0.
cplx log_determinant(const CMatrix& m);

cplx determinant(const CMatrix& m);

/// Max-norm distance of `m` from its conjugate transpose.
double hermitian_defect(const CMatrix& m);

/// Replaces m with (m + m^T)/2.
void symmetrize(CMatrix& m);

bool is_real(const CMatrix& m, double tol = 0.0);

}  // namespace ks::linalg
