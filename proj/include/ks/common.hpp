#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace ks {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

enum class ErrorKind {
  DuplicatePoint,
  DimensionMismatch,
  NonHermitianCoupling,
  NonSymmetricCoupling,
  ZeroWeight,
  EmptyConfiguration,
  NegativeDelta,
  ZeroDistance,
  CoincidentSpectralPoints,
  BoundaryEnergy,
  InvalidSpectralPoint,
  OddPhiCount,
  InvalidResolution,
  LengthMismatch,
  GridMismatch,
  NonpositiveEnergy,
  SingularDenominator,
  SingularL,
  DegenerateSchur,
  ParseError,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Numerical singularities (resonant energies, singular couplings) as
/// opposed to malformed input.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Condition number above which a denominator solve is treated as singular.
inline constexpr double kSingularCondition = 1e14;

}  // namespace ks
