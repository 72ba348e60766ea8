#include "ks/greens.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ks {

SpectralPoint SpectralPoint::interior(cplx z) {
  if ((z.imag() == 0.0 && !(z.real() < 0.0)) || !std::isfinite(z.real()) ||
      !std::isfinite(z.imag())) {
    throw Error(ErrorKind::InvalidSpectralPoint, "interior spectral point must lie off [0, inf)");
  }
  cplx root = std::sqrt(z);
  if (root.imag() < 0.0) root = -root;
  return SpectralPoint(z, root, true);
}

SpectralPoint SpectralPoint::boundary_plus(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::NonpositiveEnergy, "boundary value lambda + i0 needs lambda > 0");
  }
  return SpectralPoint(lambda, std::sqrt(lambda), false);
}

SpectralPoint SpectralPoint::conjugate() const {
  if (!interior_) {
    throw Error(ErrorKind::BoundaryEnergy, "conjugate of a boundary value is not represented");
  }
  // sqrt(conj z) with Im > 0 is -conj(sqrt z); written out so the pair is
  // exactly conjugation-symmetric in floating point.
  return SpectralPoint(std::conj(z_), -std::conj(root_), true);
}

cplx free_green(const SpectralPoint& z, double r) {
  if (!(r > 0.0)) {
    throw Error(ErrorKind::ZeroDistance, "Green function is singular at zero distance");
  }
  return std::exp(I * z.sqrt_z() * r) / (4.0 * pi * r);
}

CMatrix q_matrix(const SpectralPoint& z, std::span<const Vec3> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  CMatrix q(n, n);
  const cplx diag = I * z.sqrt_z() / (4.0 * pi);
  for (Eigen::Index m = 0; m < n; ++m) {
    q(m, m) = diag;
    for (Eigen::Index k = m + 1; k < n; ++k) {
      const double r = (points[static_cast<std::size_t>(m)] - points[static_cast<std::size_t>(k)]).norm();
      const cplx g = free_green(z, r);
      q(m, k) = g;
      q(k, m) = g;
    }
  }
  return q;
}

CMatrix q_matrix(const SpectralPoint& z, const PointConfiguration& config) {
  return q_matrix(z, config.points());
}

namespace {

void require_distinct_interior(const SpectralPoint& z, const SpectralPoint& z0) {
  if (!z.is_interior() || !z0.is_interior()) {
    throw Error(ErrorKind::BoundaryEnergy, "overlap needs interior spectral points");
  }
  if (z.z() == z0.z()) {
    throw Error(ErrorKind::CoincidentSpectralPoints, "z and z0 coincide");
  }
}

}  // namespace

cplx overlap_closed_form(const SpectralPoint& z, const SpectralPoint& z0, const Vec3& xm,
                         const Vec3& xn) {
  require_distinct_interior(z, z0);
  const double r = (xm - xn).norm();
  if (r == 0.0) return I / (4.0 * pi * (z.sqrt_z() + z0.sqrt_z()));
  return (free_green(z, r) - free_green(z0, r)) / (z.z() - z0.z());
}

cplx overlap_numeric(const SpectralPoint& z, const SpectralPoint& z0, const Vec3& xm,
                     const Vec3& xn, const OverlapQuadrature& options) {
  require_distinct_interior(z, z0);
  using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;

  const SpectralPoint z0bar = z0.conjugate();
  const cplx kz = z.sqrt_z();
  const cplx k0 = z0bar.sqrt_z();
  // conj(g(z0bar; d)) * g(z; d') with both 1/(4 pi d) factors pulled out.
  auto phase = [&](double dm, double dn) {
    return std::conj(std::exp(I * k0 * dm)) * std::exp(I * kz * dn);
  };

  const double decay = kz.imag() + k0.imag();
  const double a = 0.5 * (xm - xn).norm();
  const double rmax = a + std::log(1.0 / options.envelope_cutoff) / decay;
  constexpr double norm = 1.0 / (16.0 * pi * pi);

  if (a == 0.0) {
    auto radial = [&](double rho) -> cplx { return 4.0 * pi * norm * phase(rho, rho); };
    return Quad::integrate(radial, 0.0, rmax, options.max_depth, options.rel_tol);
  }

  // Point at distance rho from the midpoint, polar cosine t: x_m sits at
  // t = -1 and x_n at t = +1, both at rho = a. The substitution t = +-(1 - v^2)
  // removes the inverse-square-root endpoint behaviour of the integrand.
  auto integrand = [&](double rho, double t) -> cplx {
    const double dm = std::sqrt(std::max(0.0, rho * rho + a * a + 2.0 * rho * a * t));
    const double dn = std::sqrt(std::max(0.0, rho * rho + a * a - 2.0 * rho * a * t));
    return phase(dm, dn) / (dm * dn);
  };
  auto polar = [&](double rho) -> cplx {
    auto f = [&](double v) -> cplx {
      const double s = 1.0 - v * v;
      return 2.0 * v * (integrand(rho, s) + integrand(rho, -s));
    };
    return Quad::integrate(f, 0.0, 1.0, options.max_depth, options.rel_tol);
  };
  auto radial = [&](double rho) -> cplx { return 2.0 * pi * norm * rho * rho * polar(rho); };

  cplx total = Quad::integrate(radial, 0.0, a, options.max_depth, options.rel_tol);
  double lo = a;
  for (double hi : {2.0 * a, 4.0 * a}) {
    if (hi >= rmax) break;
    total += Quad::integrate(radial, lo, hi, options.max_depth, options.rel_tol);
    lo = hi;
  }
  total += Quad::integrate(radial, lo, rmax, options.max_depth, options.rel_tol);
  return total;
}

CMatrix overlap_matrix(const SpectralPoint& z, const SpectralPoint& z0,
                       std::span<const Vec3> points, OverlapPath path,
                       const OverlapQuadrature& options) {
  const auto n = static_cast<Eigen::Index>(points.size());
  CMatrix o(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = m; k < n; ++k) {
      const Vec3& xm = points[static_cast<std::size_t>(m)];
      const Vec3& xk = points[static_cast<std::size_t>(k)];
      const cplx v = path == OverlapPath::ClosedForm ? overlap_closed_form(z, z0, xm, xk)
                                                     : overlap_numeric(z, z0, xm, xk, options);
      o(m, k) = v;
      o(k, m) = v;
    }
  }
  return o;
}

}  // namespace ks
