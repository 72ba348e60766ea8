#include "ks/common.hpp"

namespace ks {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicatePoint: return "DuplicatePoint";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonHermitianCoupling: return "NonHermitianCoupling";
    case ErrorKind::NonSymmetricCoupling: return "NonSymmetricCoupling";
    case ErrorKind::ZeroWeight: return "ZeroWeight";
    case ErrorKind::EmptyConfiguration: return "EmptyConfiguration";
    case ErrorKind::NegativeDelta: return "NegativeDelta";
    case ErrorKind::ZeroDistance: return "ZeroDistance";
    case ErrorKind::CoincidentSpectralPoints: return "CoincidentSpectralPoints";
    case ErrorKind::BoundaryEnergy: return "BoundaryEnergy";
    case ErrorKind::InvalidSpectralPoint: return "InvalidSpectralPoint";
    case ErrorKind::OddPhiCount: return "OddPhiCount";
    case ErrorKind::InvalidResolution: return "InvalidResolution";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NonpositiveEnergy: return "NonpositiveEnergy";
    case ErrorKind::SingularDenominator: return "SingularDenominator";
    case ErrorKind::SingularL: return "SingularL";
    case ErrorKind::DegenerateSchur: return "DegenerateSchur";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  return kind == ErrorKind::SingularDenominator || kind == ErrorKind::SingularL ||
         kind == ErrorKind::DegenerateSchur;
}

}  // namespace ks
