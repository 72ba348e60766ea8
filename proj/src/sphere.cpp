#include "ks/sphere.hpp"

#include <algorithm>
#include <cmath>

namespace ks {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton from the Chebyshev-like initial guess, largest root first.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    const auto lo = static_cast<std::size_t>(i);
    nodes[hi] = x;
    nodes[lo] = -x;
    weights[hi] = w;
    weights[lo] = w;
  }
  if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
}

SphereGrid make_grid(int n_theta, int n_phi) {
  if (n_phi % 2 != 0) {
    throw Error(ErrorKind::OddPhiCount, "n_phi must be even for the antipodal pairing");
  }
  if (n_theta < 2 || n_phi < 4) {
    throw Error(ErrorKind::InvalidResolution, "sphere grid needs n_theta >= 2 and n_phi >= 4");
  }
  std::vector<double> t, wt;
  gauss_legendre(n_theta, t, wt);

  // Second half of the azimuths is the exact negation of the first half.
  const int half = n_phi / 2;
  std::vector<double> cphi(static_cast<std::size_t>(n_phi)), sphi(static_cast<std::size_t>(n_phi));
  for (int k = 0; k < half; ++k) {
    const double phi = 2.0 * pi * k / n_phi;
    cphi[static_cast<std::size_t>(k)] = std::cos(phi);
    sphi[static_cast<std::size_t>(k)] = std::sin(phi);
    cphi[static_cast<std::size_t>(k + half)] = -cphi[static_cast<std::size_t>(k)];
    sphi[static_cast<std::size_t>(k + half)] = -sphi[static_cast<std::size_t>(k)];
  }

  SphereGrid g;
  g.n_theta_ = n_theta;
  g.n_phi_ = n_phi;
  const std::size_t m = static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi);
  g.nodes_.resize(m);
  g.weights_.resize(static_cast<Eigen::Index>(m));
  g.antipode_.resize(m);
  const double dphi = 2.0 * pi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double ct = t[static_cast<std::size_t>(i)];
    const double st = std::sqrt((1.0 - ct) * (1.0 + ct));
    for (int k = 0; k < n_phi; ++k) {
      const std::size_t idx = static_cast<std::size_t>(i) * n_phi + k;
      g.nodes_[idx] = Vec3(st * cphi[static_cast<std::size_t>(k)], st * sphi[static_cast<std::size_t>(k)], ct);
      g.weights_(static_cast<Eigen::Index>(idx)) = wt[static_cast<std::size_t>(i)] * dphi;
      g.antipode_[idx] = static_cast<std::size_t>(n_theta - 1 - i) * n_phi + (k + half) % n_phi;
    }
  }
  return g;
}

GridResolution default_resolution(double lambda, double diameter) {
  const int nt = std::max(8, static_cast<int>(std::ceil(std::sqrt(lambda) * diameter)) + 8);
  return {nt, 2 * nt};
}

cplx inner_product(const SphereFunction& f, const SphereFunction& g, const SphereGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (f.size() != m || g.size() != m) {
    throw Error(ErrorKind::LengthMismatch, "sphere function length does not match grid");
  }
  cplx acc = 0.0;
  const RVector& w = grid.weights();
  for (Eigen::Index i = 0; i < m; ++i) acc += w(i) * f(i) * std::conj(g(i));
  return acc;
}

SphereFunction j_conjugate(const SphereFunction& w, const SphereGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (w.size() != m) {
    throw Error(ErrorKind::LengthMismatch, "sphere function length does not match grid");
  }
  SphereFunction out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out(i) = std::conj(w(static_cast<Eigen::Index>(grid.antipode(static_cast<std::size_t>(i)))));
  }
  return out;
}

}  // namespace ks
