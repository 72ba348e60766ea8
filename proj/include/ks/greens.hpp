#pragma once

#include <span>

#include "ks/common.hpp"
#include "ks/config.hpp"

namespace ks {

/// Spectral parameter of the free resolvent. Interior points carry the
/// root of z with positive imaginary part; BoundaryPlus(lambda) stands for
/// lambda + i0 with the nonnegative real root.
class SpectralPoint {
 public:
  /// Throws InvalidSpectralPoint for z on [0, inf).
  static SpectralPoint interior(cplx z);
  static SpectralPoint boundary_plus(double lambda);

  bool is_interior() const noexcept { return interior_; }
  cplx z() const noexcept { return z_; }
  cplx sqrt_z() const noexcept { return root_; }
  /// z-bar for interior points. Throws BoundaryEnergy on boundary values.
  SpectralPoint conjugate() const;

 private:
  SpectralPoint(cplx z, cplx root, bool interior) : z_(z), root_(root), interior_(interior) {}

  cplx z_;
  cplx root_;
  bool interior_;
};

/// e^{i sqrt(z) r} / (4 pi r). Throws ZeroDistance for r == 0.
cplx free_green(const SpectralPoint& z, double r);

/// N x N complex-symmetric matrix of Green values with the regularised
/// diagonal i sqrt(z) / (4 pi).
CMatrix q_matrix(const SpectralPoint& z, std::span<const Vec3> points);
CMatrix q_matrix(const SpectralPoint& z, const PointConfiguration& config);

/// Closed form of the overlap integral of conj(g(z0-bar; . - x_m)) and
/// g(z; . - x_n): (g(z; r) - g(z0; r)) / (z - z0), and i / (4 pi (sqrt z + sqrt z0))
/// on the diagonal.
cplx overlap_closed_form(const SpectralPoint& z, const SpectralPoint& z0, const Vec3& xm,
                         const Vec3& xn);

struct OverlapQuadrature {
  double rel_tol = 1e-11;
  unsigned max_depth = 18;
  /// Radial cut-off where the integrand envelope drops below this value.
  double envelope_cutoff = 1e-14;
};

/// The same overlap by direct integration over R^3 in spherical
/// coordinates about the midpoint of x_m and x_n, polar axis along
/// x_n - x_m (azimuth integrated analytically by symmetry).
cplx overlap_numeric(const SpectralPoint& z, const SpectralPoint& z0, const Vec3& xm,
                     const Vec3& xn, const OverlapQuadrature& options = {});

enum class OverlapPath { ClosedForm, Numeric };

/// Matrix of overlaps for all carrier pairs.
CMatrix overlap_matrix(const SpectralPoint& z, const SpectralPoint& z0,
                       std::span<const Vec3> points, OverlapPath path,
                       const OverlapQuadrature& options = {});

}  // namespace ks
