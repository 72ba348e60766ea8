#pragma once

#include <array>
#include <memory>

#include "ks/common.hpp"
#include "ks/config.hpp"
#include "ks/greens.hpp"

namespace ks {

/// Uniform midpoint grid on an axis-aligned box.
class VolumeGrid {
 public:
  VolumeGrid(const Vec3& lo, const Vec3& hi, std::array<int, 3> counts);

  /// Cube [-side/2, side/2]^3 with n nodes per axis.
  static VolumeGrid cube(double side, int n);

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(counts_[0]) * counts_[1] * counts_[2];
  }
  const std::array<int, 3>& counts() const noexcept { return counts_; }
  const Vec3& lo() const noexcept { return lo_; }
  const Vec3& hi() const noexcept { return hi_; }
  const Vec3& spacing() const noexcept { return h_; }
  double weight() const noexcept { return h_.prod(); }
  double volume() const noexcept { return (hi_ - lo_).prod(); }
  /// Node i = ix + nx (iy + ny iz).
  Vec3 node(std::size_t i) const;

  bool same_layout(const VolumeGrid& other) const noexcept {
    return counts_ == other.counts_ && lo_ == other.lo_ && hi_ == other.hi_;
  }

 private:
  Vec3 lo_;
  Vec3 hi_;
  std::array<int, 3> counts_;
  Vec3 h_;
};

using SampledFunction = CVector;

SampledFunction sample(const VolumeGrid& grid, const auto& fn) {
  SampledFunction out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) out(static_cast<Eigen::Index>(i)) = fn(grid.node(i));
  return out;
}

/// sqrt(sum_i w |f_i|^2).
double grid_norm(const SampledFunction& f, const VolumeGrid& grid);

/// Integral of g(z; |y|) over the ball of volume `cell_volume` centred at
/// the origin; replaces the singular self term of the discrete kernel.
cplx ball_average_self_term(const SpectralPoint& z, double cell_volume);

/// Discrete free resolvent (R(z) f)(x_i) = sum_j w g(z; |x_i - x_j|) f_j,
/// evaluated as a zero-padded FFT convolution.
class FreeResolvent {
 public:
  /// Throws BoundaryEnergy for a boundary spectral point.
  FreeResolvent(const SpectralPoint& z, const VolumeGrid& grid);

  SampledFunction apply(const SampledFunction& f) const;
  const SpectralPoint& spectral_point() const noexcept { return z_; }
  const VolumeGrid& grid() const noexcept { return grid_; }

 private:
  struct Plans;

  SpectralPoint z_;
  VolumeGrid grid_;
  std::array<int, 3> padded_;
  std::vector<cplx> kernel_hat_;
  std::shared_ptr<const Plans> plans_;
};

SampledFunction apply_free_resolvent(const SpectralPoint& z, const SampledFunction& f,
                                     const VolumeGrid& grid);

/// O(M^2) reference summation of the same discrete operator.
SampledFunction apply_free_resolvent_direct(const SpectralPoint& z, const SampledFunction& f,
                                            const VolumeGrid& grid);

/// Krein resolvent R_L(z) = R(z) - sum_mn Gamma_mn (., g_n(z-bar)) g_m(z) with
/// Gamma = [Q(z) + c L]^{-1}; inner products by volume quadrature.
class PerturbedResolvent {
 public:
  PerturbedResolvent(const SpectralPoint& z, const PointConfiguration& config,
                     const VolumeGrid& grid);

  SampledFunction apply(const SampledFunction& f) const;
  double gamma_condition() const noexcept { return cond_; }
  const CMatrix& gamma() const noexcept { return gamma_; }

 private:
  FreeResolvent free_;
  CMatrix gamma_;
  CMatrix g_z_;     // g_m(z; x_i), M x N
  CMatrix g_zbar_;  // g_n(z-bar; x_i), M x N
  double cond_ = 1.0;
};

SampledFunction apply_perturbed_resolvent(const SpectralPoint& z, const SampledFunction& f,
                                          const PointConfiguration& config,
                                          const VolumeGrid& grid);

/// ||[R_L(z1) - R_L(z2) - (z1 - z2) R_L(z1) R_L(z2)] f|| / ||f|| on `grid`, with
/// f extended by zero and the products evaluated on a box padded by half its
/// size per side.
double hilbert_identity_residual(const SpectralPoint& z1, const SpectralPoint& z2,
                                 const SampledFunction& f, const PointConfiguration& config,
                                 const VolumeGrid& grid);

/// max |Q(z) - Q(z0) - (z - z0) O| with O the overlap matrix on `path`.
double q_identity_residual(const SpectralPoint& z, const SpectralPoint& z0,
                           const PointConfiguration& config, OverlapPath path,
                           const OverlapQuadrature& options = {});

/// Relative grid-norm residual of R(z) g(z0; . - x0) = (g(z) - g(z0)) / (z - z0).
double transfer_identity_residual(const SpectralPoint& z, const SpectralPoint& z0,
                                  const Vec3& x0, const VolumeGrid& grid);

/// Smallest singular value of the dense grid matrix of R_L(z). Grids above
/// 4096 nodes raise InvalidArgument.
double smallest_singular_value(const SpectralPoint& z, const PointConfiguration& config,
                               const VolumeGrid& grid);

}  // namespace ks
