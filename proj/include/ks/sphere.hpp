#pragma once

#include <cstddef>
#include <vector>

#include "ks/common.hpp"

namespace ks {

/// Values of a function on the nodes of a SphereGrid.
using SphereFunction = CVector;

/// Product quadrature on S^2: Gauss-Legendre in cos(theta) times the
/// periodic trapezoid rule in phi. Closed under n -> -n.
class SphereGrid {
 public:
  std::size_t size() const noexcept { return nodes_.size(); }
  int n_theta() const noexcept { return n_theta_; }
  int n_phi() const noexcept { return n_phi_; }
  const std::vector<Vec3>& nodes() const noexcept { return nodes_; }
  const RVector& weights() const noexcept { return weights_; }
  /// Index of the node at -nodes()[i].
  std::size_t antipode(std::size_t i) const noexcept { return antipode_[i]; }
  const std::vector<std::size_t>& antipodes() const noexcept { return antipode_; }

  bool same_layout(const SphereGrid& other) const noexcept {
    return n_theta_ == other.n_theta_ && n_phi_ == other.n_phi_;
  }

 private:
  friend SphereGrid make_grid(int n_theta, int n_phi);

  int n_theta_ = 0;
  int n_phi_ = 0;
  std::vector<Vec3> nodes_;
  RVector weights_;
  std::vector<std::size_t> antipode_;
};

/// Throws OddPhiCount for odd n_phi, InvalidResolution for n_theta < 2 or
/// n_phi < 4.
SphereGrid make_grid(int n_theta, int n_phi);

struct GridResolution {
  int n_theta;
  int n_phi;
};

/// n_theta = max(8, ceil(sqrt(lambda) * diameter) + 8), n_phi = 2 n_theta.
GridResolution default_resolution(double lambda, double diameter);

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending and exactly
/// antisymmetric (x[n-1-i] == -x[i]).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// sum_i w_i f_i conj(g_i). Throws LengthMismatch.
cplx inner_product(const SphereFunction& f, const SphereFunction& g, const SphereGrid& grid);

/// (J w)_i = conj(w at the antipode of node i).
SphereFunction j_conjugate(const SphereFunction& w, const SphereGrid& grid);

}  // namespace ks
