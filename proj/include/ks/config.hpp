#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ks/common.hpp"

namespace ks {

/// Scale factor c multiplying L in the Krein denominator Q(z) + c L.
enum class CouplingConvention { FourPi, Unit };

double convention_scale(CouplingConvention convention);

/// Coupling operator L of a point configuration: either a diagonal of
/// nonzero real weights or a full Hermitian matrix.
class CouplingOperator {
 public:
  static CouplingOperator diagonal(std::vector<double> weights,
                                   CouplingConvention convention = CouplingConvention::FourPi);
  static CouplingOperator hermitian(CMatrix matrix,
                                    CouplingConvention convention = CouplingConvention::FourPi);

  bool is_diagonal() const noexcept { return diagonal_; }
  /// True when L has no imaginary part (diagonal or real symmetric).
  bool is_real_symmetric() const noexcept { return real_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

  const CMatrix& matrix() const noexcept { return matrix_; }
  /// Diagonal entries of L (the weights w_n for diagonal couplings).
  std::vector<double> weights() const;

  CouplingConvention convention() const noexcept { return convention_; }
  double scale() const { return convention_scale(convention_); }
  CouplingOperator with_convention(CouplingConvention convention) const;

 private:
  CouplingOperator() = default;

  CMatrix matrix_;
  bool diagonal_ = true;
  bool real_ = true;
  CouplingConvention convention_ = CouplingConvention::FourPi;
};

struct SeparationData {
  /// Minimum pairwise distance; empty for fewer than two points.
  std::optional<double> d;
  /// delta[0] = |x_0|, delta[n] = min_{0 <= j != k <= n} |x_j - x_k|.
  std::vector<double> delta;
};

SeparationData separation_sequence(std::span<const Vec3> points);

class PointConfiguration {
 public:
  PointConfiguration(std::vector<Vec3> points, CouplingOperator coupling);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const std::vector<Vec3>& points() const noexcept { return points_; }
  const CouplingOperator& coupling() const noexcept { return coupling_; }
  const SeparationData& separation() const noexcept { return separation_; }
  /// Near-duplicate carriers and similar non-fatal findings.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  double diameter() const noexcept { return diameter_; }

  PointConfiguration with_convention(CouplingConvention convention) const;

 private:
  std::vector<Vec3> points_;
  CouplingOperator coupling_;
  SeparationData separation_;
  std::vector<std::string> warnings_;
  double diameter_ = 0.0;
};

/// Validates points and coupling and computes separation data. Throws
/// DuplicatePoint, DimensionMismatch (and the coupling errors surfaced by
/// CouplingOperator factories).
PointConfiguration build_configuration(std::vector<Vec3> points, CouplingOperator coupling);

enum class Verdict { Pass, Fail, Inconclusive };
std::string_view to_string(Verdict verdict);

/// Whether the supplied weights describe the whole family or a truncation
/// of an infinite one.
enum class FamilyExtent { Finite, Truncated };

struct SummabilityReport {
  std::vector<std::size_t> orders;
  std::vector<double> sum_b;
  std::vector<double> sum_b_over_delta;
  Verdict verdict = Verdict::Inconclusive;
  /// Geometric extrapolation of the remaining tail of the slower series.
  double tail_estimate = 0.0;
  /// Ratio of the last two partial-sum increments (per series).
  double ratio_b = 0.0;
  double ratio_b_over_delta = 0.0;
};

/// Increment ratios at or below this pass, at or above kFailRatio fail.
inline constexpr double kPassRatio = 0.75;
inline constexpr double kFailRatio = 0.95;

/// Dyadic orders n/8, n/4, n/2, n (deduplicated, at least 1).
std::vector<std::size_t> default_truncation_orders(std::size_t n);

/// Diagonal coupling: b_nn = 1/sqrt|w_n|.
SummabilityReport check_summability(std::span<const double> weights,
                                    std::span<const double> delta,
                                    std::span<const std::size_t> orders,
                                    FamilyExtent extent);

/// Full coupling: `b` holds |L|^{-1/2}.
SummabilityReport check_summability(const CMatrix& b, std::span<const double> delta,
                                    std::span<const std::size_t> orders,
                                    FamilyExtent extent);

/// |L|^{-1/2} computed spectrally. Throws SingularL if L is singular.
CMatrix inverse_sqrt_abs(const CMatrix& hermitian);

/// J_L = L |L|^{-1}. Throws SingularL if L is singular.
CMatrix sign_operator(const CMatrix& hermitian);

}  // namespace ks
