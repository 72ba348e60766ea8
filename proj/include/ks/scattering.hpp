#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "ks/common.hpp"
#include "ks/config.hpp"
#include "ks/sphere.hpp"

namespace ks {

/// q_j(n_i) = lambda^{1/4} / (4 pi) exp(i sqrt(lambda) n_i . x_j), one row per
/// carrier, one column per grid node.
struct PlaneWaveVectors {
  double lambda = 0.0;
  CMatrix q;
};

PlaneWaveVectors plane_wave_vectors(double lambda, std::span<const Vec3> points,
                                    const SphereGrid& grid);

/// Plane-wave vector of carrier x evaluated at an arbitrary direction.
cplx plane_wave(double lambda, const Vec3& x, const Vec3& n);

/// sin(sqrt(lambda) r) / (4 pi r), diagonal sqrt(lambda) / (4 pi); equals
/// Im Q(lambda + i0).
RMatrix gram_analytic(double lambda, std::span<const Vec3> points);

/// Entry (j, k) = <q_k, q_j> on the grid.
CMatrix gram_quadrature(const PlaneWaveVectors& qvecs, const SphereGrid& grid);

enum class AssemblyPath { Direct, Scaled };
std::string_view to_string(AssemblyPath path);

struct SMatrixData {
  double lambda = 0.0;
  std::vector<Vec3> points;
  /// Re Q(lambda + i0) + c L (Hermitian).
  CMatrix kappa;
  /// Im Q(lambda + i0).
  RMatrix gram;
  /// kappa + i gram = Q(lambda + i0) + c L.
  CMatrix denominator;
  /// Inverse of `denominator`.
  CMatrix C;
  PlaneWaveVectors qvecs;
  /// Condition number of the matrix actually inverted.
  double cond = 1.0;
  AssemblyPath path = AssemblyPath::Direct;

  std::size_t size() const noexcept { return points.size(); }
};

/// Throws NonpositiveEnergy or SingularDenominator.
SMatrixData assemble_s(double lambda, const PointConfiguration& config, const SphereGrid& grid);

/// Same operator assembled through the |L|^{-1/2}-symmetrised denominator
/// |L|^{-1/2} Q |L|^{-1/2} / c + J_L. Throws SingularL for singular L.
SMatrixData assemble_s_scaled(double lambda, const PointConfiguration& config,
                              const SphereGrid& grid);

/// Off-identity kernel K(n, n') = -2i sum_{jk} C_jk q_k(n) conj(q_j(n')).
cplx s_kernel(const SMatrixData& s, const Vec3& n, const Vec3& n_prime);

/// K sampled at all pairs of grid nodes (rows n, columns n').
CMatrix kernel_on_grid(const SMatrixData& s, const SphereGrid& grid);

/// Grid matrix of S acting on nodal values: I + K W.
CMatrix s_grid_matrix(const SMatrixData& s, const SphereGrid& grid);

SphereFunction s_apply(const SMatrixData& s, const SphereFunction& f, const SphereGrid& grid);

/// U = (kappa - i gram)(kappa + i gram)^{-1}; S q_s = sum_j U_sj q_j.
CMatrix cayley_on_span(const SMatrixData& s);

/// det(kappa - i gram) / det(kappa + i gram).
cplx det_s(const SMatrixData& s);

/// ||S^H W S - W||_F / ||W||_F for the grid matrix of S, evaluated through
/// the rank-N structure of S - I.
double unitarity_defect(const SMatrixData& s, const SphereGrid& grid);

struct CrossSectionResult {
  Vec3 n_in;
  SphereFunction amplitude;
  RVector sigma_diff;
  double sigma_total = 0.0;
  double optical_lhs = 0.0;
  double optical_rhs = 0.0;
  double cond = 1.0;
};

/// Amplitude convention K(n, n') = (i sqrt(lambda) / 2 pi) f(n, n').
CrossSectionResult cross_section(const SMatrixData& s, const SphereGrid& grid, const Vec3& n_in);
CrossSectionResult cross_section(double lambda, const PointConfiguration& config,
                                 const SphereGrid& grid, const Vec3& n_in);

}  // namespace ks
