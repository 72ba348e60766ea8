#include "ks/scattering.hpp"

#include <cmath>

#include "ks/greens.hpp"
#include "ks/linalg.hpp"

namespace ks {

namespace {

void require_positive(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::NonpositiveEnergy, "scattering energy must be positive");
  }
}

void require_grid(const SMatrixData& s, const SphereGrid& grid) {
  if (s.qvecs.q.cols() != static_cast<Eigen::Index>(grid.size()) ||
      s.qvecs.q.rows() != static_cast<Eigen::Index>(s.size())) {
    throw Error(ErrorKind::GridMismatch, "S-matrix data was assembled on a different grid");
  }
}

CVector plane_waves_at(const SMatrixData& s, const Vec3& n) {
  CVector v(static_cast<Eigen::Index>(s.size()));
  for (std::size_t j = 0; j < s.size(); ++j) {
    v(static_cast<Eigen::Index>(j)) = plane_wave(s.lambda, s.points[j], n);
  }
  return v;
}

SMatrixData base_data(double lambda, const PointConfiguration& config, const SphereGrid& grid) {
  require_positive(lambda);
  SMatrixData s;
  s.lambda = lambda;
  s.points = config.points();
  s.qvecs = plane_wave_vectors(lambda, config.points(), grid);
  const CMatrix q = q_matrix(SpectralPoint::boundary_plus(lambda), config.points());
  const double c = config.coupling().scale();
  s.kappa = q.real().cast<cplx>() + c * config.coupling().matrix();
  s.gram = gram_analytic(lambda, config.points());
  s.denominator = q + c * config.coupling().matrix();
  return s;
}

}  // namespace

cplx plane_wave(double lambda, const Vec3& x, const Vec3& n) {
  return std::pow(lambda, 0.25) / (4.0 * pi) * std::exp(I * std::sqrt(lambda) * n.dot(x));
}

PlaneWaveVectors plane_wave_vectors(double lambda, std::span<const Vec3> points,
                                    const SphereGrid& grid) {
  require_positive(lambda);
  PlaneWaveVectors out;
  out.lambda = lambda;
  out.q.resize(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(grid.size()));
  const double amp = std::pow(lambda, 0.25) / (4.0 * pi);
  const double k = std::sqrt(lambda);
  for (std::size_t j = 0; j < points.size(); ++j) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out.q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          amp * std::exp(I * (k * grid.nodes()[i].dot(points[j])));
    }
  }
  return out;
}

RMatrix gram_analytic(double lambda, std::span<const Vec3> points) {
  require_positive(lambda);
  const double k = std::sqrt(lambda);
  const auto n = static_cast<Eigen::Index>(points.size());
  RMatrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    g(j, j) = k / (4.0 * pi);
    for (Eigen::Index l = j + 1; l < n; ++l) {
      const double r = (points[static_cast<std::size_t>(j)] - points[static_cast<std::size_t>(l)]).norm();
      if (r == 0.0) throw Error(ErrorKind::ZeroDistance, "coincident carriers in Gram matrix");
      // Same expression as Im of the Green function, so the two agree bitwise.
      const double v = (std::exp(I * k * r) / (4.0 * pi * r)).imag();
      g(j, l) = v;
      g(l, j) = v;
    }
  }
  return g;
}

CMatrix gram_quadrature(const PlaneWaveVectors& qvecs, const SphereGrid& grid) {
  if (qvecs.q.cols() != static_cast<Eigen::Index>(grid.size())) {
    throw Error(ErrorKind::GridMismatch, "plane-wave vectors sampled on a different grid");
  }
  const CMatrix weighted = qvecs.q * grid.weights().cast<cplx>().asDiagonal();
  return qvecs.q.conjugate() * weighted.transpose();
}

std::string_view to_string(AssemblyPath path) {
  return path == AssemblyPath::Direct ? "direct" : "scaled";
}

SMatrixData assemble_s(double lambda, const PointConfiguration& config, const SphereGrid& grid) {
  SMatrixData s = base_data(lambda, config, grid);
  s.path = AssemblyPath::Direct;
  s.C = linalg::checked_inverse(s.denominator, &s.cond);
  if (config.coupling().is_real_symmetric()) linalg::symmetrize(s.C);
  return s;
}

SMatrixData assemble_s_scaled(double lambda, const PointConfiguration& config,
                              const SphereGrid& grid) {
  SMatrixData s = base_data(lambda, config, grid);
  s.path = AssemblyPath::Scaled;
  if (s.size() == 0) {
    s.C = CMatrix(0, 0);
    return s;
  }
  const CMatrix& l = config.coupling().matrix();
  const CMatrix b = inverse_sqrt_abs(l);
  const CMatrix j = sign_operator(l);
  const double c = config.coupling().scale();
  const CMatrix q = q_matrix(SpectralPoint::boundary_plus(lambda), config.points());
  const CMatrix scaled = b * q * b / c + j;
  const CMatrix gamma = linalg::checked_inverse(scaled, &s.cond);
  s.C = b * gamma * b / c;
  if (config.coupling().is_real_symmetric()) linalg::symmetrize(s.C);
  return s;
}

cplx s_kernel(const SMatrixData& s, const Vec3& n, const Vec3& n_prime) {
  if (s.size() == 0) return 0.0;
  const CVector qn = plane_waves_at(s, n);
  const CVector qp = plane_waves_at(s, n_prime);
  // sum_{jk} C_jk q_k(n) conj(q_j(n')) = conj(q(n'))^T C q(n)
  return -2.0 * I * (qp.conjugate().transpose() * s.C * qn)(0, 0);
}

CMatrix kernel_on_grid(const SMatrixData& s, const SphereGrid& grid) {
  require_grid(s, grid);
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (s.size() == 0) return CMatrix::Zero(m, m);
  const CMatrix& p = s.qvecs.q;
  return (-2.0 * I) * (p.transpose() * s.C.transpose() * p.conjugate());
}

CMatrix s_grid_matrix(const SMatrixData& s, const SphereGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  CMatrix out = kernel_on_grid(s, grid) * grid.weights().cast<cplx>().asDiagonal();
  out += CMatrix::Identity(m, m);
  return out;
}

SphereFunction s_apply(const SMatrixData& s, const SphereFunction& f, const SphereGrid& grid) {
  if (f.size() != static_cast<Eigen::Index>(grid.size())) {
    throw Error(ErrorKind::LengthMismatch, "sphere function length does not match grid");
  }
  if (s.size() == 0) return f;
  require_grid(s, grid);
  const CMatrix& p = s.qvecs.q;
  // h_j = <f, q_j>
  const CVector h = p.conjugate() * grid.weights().cast<cplx>().cwiseProduct(f);
  return f - 2.0 * I * (p.transpose() * (s.C.transpose() * h));
}

CMatrix cayley_on_span(const SMatrixData& s) {
  if (s.size() == 0) return CMatrix(0, 0);
  const CMatrix minus = s.kappa - I * s.gram.cast<cplx>();
  return minus * s.C;
}

cplx det_s(const SMatrixData& s) {
  if (s.size() == 0) return 1.0;
  const CMatrix minus = s.kappa - I * s.gram.cast<cplx>();
  return std::exp(linalg::log_determinant(minus) - linalg::log_determinant(s.denominator));
}

double unitarity_defect(const SMatrixData& s, const SphereGrid& grid) {
  if (s.size() == 0) return 0.0;
  require_grid(s, grid);
  // S = I + A with A = X M Y^H, X = P^T, Y = W X, M = -2i C^T. Then
  // S^H W S - W = Y T Y^H with T = M + M^H + M^H (X^H W X) M.
  const CMatrix x = s.qvecs.q.transpose();
  const CMatrix y = grid.weights().cast<cplx>().asDiagonal() * x;
  const CMatrix mk = (-2.0 * I) * s.C.transpose();
  const CMatrix gq = x.adjoint() * y;
  const CMatrix t = mk + mk.adjoint() + mk.adjoint() * gq * mk;
  const CMatrix h = y.adjoint() * y;
  const double fro2 = (t * h * t.adjoint() * h).trace().real();
  return std::sqrt(std::max(0.0, fro2)) / grid.weights().norm();
}

CrossSectionResult cross_section(const SMatrixData& s, const SphereGrid& grid, const Vec3& n_in) {
  require_grid(s, grid);
  CrossSectionResult out;
  out.n_in = n_in.normalized();
  out.cond = s.cond;
  const auto m = static_cast<Eigen::Index>(grid.size());
  const double k = std::sqrt(s.lambda);
  const cplx to_amp = 2.0 * pi / (I * k);
  out.amplitude = SphereFunction::Zero(m);
  out.sigma_diff = RVector::Zero(m);
  if (s.size() == 0) return out;

  const CVector q_in = plane_waves_at(s, out.n_in);
  // K(n_i, n_in) for every node: -2i sum_{jk} C_jk q_k(n_i) conj(q_j(n_in))
  const CVector coef = s.C.transpose() * q_in.conjugate();
  out.amplitude = to_amp * ((-2.0 * I) * (s.qvecs.q.transpose() * coef));
  out.sigma_diff = out.amplitude.cwiseAbs2();
  out.sigma_total = grid.weights().dot(out.sigma_diff);
  const cplx forward = to_amp * s_kernel(s, out.n_in, out.n_in);
  out.optical_lhs = out.sigma_total;
  out.optical_rhs = 4.0 * pi / k * forward.imag();
  return out;
}

CrossSectionResult cross_section(double lambda, const PointConfiguration& config,
                                 const SphereGrid& grid, const Vec3& n_in) {
  return cross_section(assemble_s(lambda, config, grid), grid, n_in);
}

}  // namespace ks
