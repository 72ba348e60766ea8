#include "ks/krein_resolvent.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "ks/linalg.hpp"

namespace ks {

VolumeGrid::VolumeGrid(const Vec3& lo, const Vec3& hi, std::array<int, 3> counts)
    : lo_(lo), hi_(hi), counts_(counts) {
  for (int a = 0; a < 3; ++a) {
    if (counts_[a] < 1 || !(hi_(a) > lo_(a))) {
      throw Error(ErrorKind::InvalidResolution, "volume grid needs positive extent and counts");
    }
    h_(a) = (hi_(a) - lo_(a)) / counts_[a];
  }
}

VolumeGrid VolumeGrid::cube(double side, int n) {
  const Vec3 half = Vec3::Constant(0.5 * side);
  return VolumeGrid(-half, half, {n, n, n});
}

Vec3 VolumeGrid::node(std::size_t i) const {
  const auto nx = static_cast<std::size_t>(counts_[0]);
  const auto ny = static_cast<std::size_t>(counts_[1]);
  const std::size_t ix = i % nx;
  const std::size_t iy = (i / nx) % ny;
  const std::size_t iz = i / (nx * ny);
  return Vec3(lo_(0) + (static_cast<double>(ix) + 0.5) * h_(0),
              lo_(1) + (static_cast<double>(iy) + 0.5) * h_(1),
              lo_(2) + (static_cast<double>(iz) + 0.5) * h_(2));
}

double grid_norm(const SampledFunction& f, const VolumeGrid& grid) {
  return std::sqrt(grid.weight() * f.squaredNorm());
}

cplx ball_average_self_term(const SpectralPoint& z, double cell_volume) {
  const double a = std::cbrt(3.0 * cell_volume / (4.0 * pi));
  const cplx k = z.sqrt_z();
  const cplx x = I * k * a;
  // integral_0^a r e^{ikr} dr = (e^{ika}(1 - ika) - 1) / k^2
  if (std::abs(x) < 1e-2) {
    cplx term = 1.0, acc = 0.0, power = 1.0;
    double fact = 2.0;
    for (int n = 2; n < 10; ++n) {
      term = (n - 1.0) / fact * power;
      acc += term;
      power *= x;
      fact *= n + 1.0;
    }
    return a * a * acc;
  }
  return (std::exp(x) * (1.0 - x) - 1.0) / (k * k);
}

struct FreeResolvent::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~Plans() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

void require_interior(const SpectralPoint& z) {
  if (!z.is_interior()) {
    throw Error(ErrorKind::BoundaryEnergy, "resolvent application needs Im z != 0");
  }
}

}  // namespace

FreeResolvent::FreeResolvent(const SpectralPoint& z, const VolumeGrid& grid)
    : z_(z), grid_(grid) {
  require_interior(z);
  const auto& n = grid.counts();
  padded_ = {2 * n[0], 2 * n[1], 2 * n[2]};
  const std::size_t total = static_cast<std::size_t>(padded_[0]) * padded_[1] * padded_[2];

  auto plans = std::make_shared<Plans>();
  {
    std::vector<cplx> scratch(total);
    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW wants the slowest axis first.
    plans->forward = fftw_plan_dft_3d(padded_[2], padded_[1], padded_[0], as_fftw(scratch.data()),
                                      as_fftw(scratch.data()), FFTW_FORWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans->backward = fftw_plan_dft_3d(padded_[2], padded_[1], padded_[0], as_fftw(scratch.data()),
                                       as_fftw(scratch.data()), FFTW_BACKWARD,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  plans_ = plans;

  const double w = grid.weight();
  const Vec3& h = grid.spacing();
  kernel_hat_.assign(total, 0.0);
  for (int kz = 0; kz < padded_[2]; ++kz) {
    const int dz = kz < n[2] ? kz : kz - padded_[2];
    if (std::abs(dz) >= n[2]) continue;
    for (int ky = 0; ky < padded_[1]; ++ky) {
      const int dy = ky < n[1] ? ky : ky - padded_[1];
      if (std::abs(dy) >= n[1]) continue;
      for (int kx = 0; kx < padded_[0]; ++kx) {
        const int dx = kx < n[0] ? kx : kx - padded_[0];
        if (std::abs(dx) >= n[0]) continue;
        const std::size_t idx = (static_cast<std::size_t>(kz) * padded_[1] + ky) * padded_[0] + kx;
        if (dx == 0 && dy == 0 && dz == 0) {
          kernel_hat_[idx] = ball_average_self_term(z, w);
        } else {
          const double r = Vec3(dx * h(0), dy * h(1), dz * h(2)).norm();
          kernel_hat_[idx] = w * free_green(z, r);
        }
      }
    }
  }
  fftw_execute_dft(plans_->forward, as_fftw(kernel_hat_.data()), as_fftw(kernel_hat_.data()));
}

SampledFunction FreeResolvent::apply(const SampledFunction& f) const {
  if (f.size() != static_cast<Eigen::Index>(grid_.size())) {
    throw Error(ErrorKind::LengthMismatch, "sampled function length does not match grid");
  }
  const auto& n = grid_.counts();
  const std::size_t total = kernel_hat_.size();
  std::vector<cplx> buf(total, 0.0);
  auto padded_index = [&](int ix, int iy, int iz) {
    return (static_cast<std::size_t>(iz) * padded_[1] + iy) * padded_[0] + ix;
  };
  std::size_t src = 0;
  for (int iz = 0; iz < n[2]; ++iz)
    for (int iy = 0; iy < n[1]; ++iy)
      for (int ix = 0; ix < n[0]; ++ix) buf[padded_index(ix, iy, iz)] = f(static_cast<Eigen::Index>(src++));

  fftw_execute_dft(plans_->forward, as_fftw(buf.data()), as_fftw(buf.data()));
  for (std::size_t i = 0; i < total; ++i) buf[i] *= kernel_hat_[i];
  fftw_execute_dft(plans_->backward, as_fftw(buf.data()), as_fftw(buf.data()));

  const double scale = 1.0 / static_cast<double>(total);
  SampledFunction out(f.size());
  std::size_t dst = 0;
  for (int iz = 0; iz < n[2]; ++iz)
    for (int iy = 0; iy < n[1]; ++iy)
      for (int ix = 0; ix < n[0]; ++ix) out(static_cast<Eigen::Index>(dst++)) = scale * buf[padded_index(ix, iy, iz)];
  return out;
}

SampledFunction apply_free_resolvent(const SpectralPoint& z, const SampledFunction& f,
                                     const VolumeGrid& grid) {
  return FreeResolvent(z, grid).apply(f);
}

SampledFunction apply_free_resolvent_direct(const SpectralPoint& z, const SampledFunction& f,
                                            const VolumeGrid& grid) {
  require_interior(z);
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (f.size() != m) {
    throw Error(ErrorKind::LengthMismatch, "sampled function length does not match grid");
  }
  const double w = grid.weight();
  const cplx self = ball_average_self_term(z, w);
  std::vector<Vec3> nodes(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) nodes[i] = grid.node(i);
  SampledFunction out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    cplx acc = self * f(i);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      acc += w * free_green(z, (nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)]).norm()) * f(j);
    }
    out(i) = acc;
  }
  return out;
}

namespace {

CMatrix sampled_columns(const SpectralPoint& z, const PointConfiguration& config,
                        const VolumeGrid& grid) {
  CMatrix g(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(config.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.node(i);
    for (std::size_t n = 0; n < config.size(); ++n) {
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) =
          free_green(z, (x - config.points()[n]).norm());
    }
  }
  return g;
}

}  // namespace

PerturbedResolvent::PerturbedResolvent(const SpectralPoint& z, const PointConfiguration& config,
                                       const VolumeGrid& grid)
    : free_(z, grid) {
  const CMatrix denom = q_matrix(z, config) + config.coupling().scale() * config.coupling().matrix();
  gamma_ = linalg::checked_inverse(denom, &cond_);
  g_z_ = sampled_columns(z, config, grid);
  g_zbar_ = sampled_columns(z.conjugate(), config, grid);
}

SampledFunction PerturbedResolvent::apply(const SampledFunction& f) const {
  SampledFunction out = free_.apply(f);
  if (gamma_.size() == 0) return out;
  // h_n = (f, g_n(z-bar)) = sum_i w f_i conj(g_n(z-bar; x_i))
  const CVector h = free_.grid().weight() * (g_zbar_.adjoint() * f);
  out -= g_z_ * (gamma_ * h);
  return out;
}

SampledFunction apply_perturbed_resolvent(const SpectralPoint& z, const SampledFunction& f,
                                          const PointConfiguration& config,
                                          const VolumeGrid& grid) {
  return PerturbedResolvent(z, config, grid).apply(f);
}

double hilbert_identity_residual(const SpectralPoint& z1, const SpectralPoint& z2,
                                 const SampledFunction& f, const PointConfiguration& config,
                                 const VolumeGrid& grid) {
  require_interior(z1);
  require_interior(z2);
  if (z1.z() == z2.z()) {
    throw Error(ErrorKind::CoincidentSpectralPoints, "z1 and z2 coincide");
  }
  if (static_cast<std::size_t>(f.size()) != grid.size()) {
    throw Error(ErrorKind::DimensionMismatch, "sampled function does not match the grid");
  }
  const double fnorm = grid_norm(f, grid);
  if (fnorm == 0.0) return 0.0;
  // R_L(z2) f is not compactly supported, so the products are formed on a grid
  // with a margin of half the box per side and restricted afterwards.
  const std::array<int, 3>& n = grid.counts();
  const std::array<int, 3> pad{(n[0] + 1) / 2, (n[1] + 1) / 2, (n[2] + 1) / 2};
  const Vec3 margin(pad[0] * grid.spacing()(0), pad[1] * grid.spacing()(1),
                    pad[2] * grid.spacing()(2));
  const VolumeGrid ext(grid.lo() - margin, grid.hi() + margin,
                       {n[0] + 2 * pad[0], n[1] + 2 * pad[1], n[2] + 2 * pad[2]});
  const std::array<int, 3>& m = ext.counts();
  auto ext_index = [&](std::size_t i) {
    const auto ix = static_cast<int>(i % static_cast<std::size_t>(n[0]));
    const auto iy = static_cast<int>((i / static_cast<std::size_t>(n[0])) % static_cast<std::size_t>(n[1]));
    const auto iz = static_cast<int>(i / (static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1])));
    return static_cast<Eigen::Index>(ix + pad[0]) +
           static_cast<Eigen::Index>(m[0]) *
               (static_cast<Eigen::Index>(iy + pad[1]) +
                static_cast<Eigen::Index>(m[1]) * static_cast<Eigen::Index>(iz + pad[2]));
  };
  SampledFunction fe = SampledFunction::Zero(static_cast<Eigen::Index>(ext.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) fe(ext_index(i)) = f(static_cast<Eigen::Index>(i));

  const PerturbedResolvent r1(z1, config, ext);
  const PerturbedResolvent r2(z2, config, ext);
  const SampledFunction a = r1.apply(fe);
  const SampledFunction b = r2.apply(fe);
  const SampledFunction c = r1.apply(b);
  const SampledFunction full = a - b - (z1.z() - z2.z()) * c;
  SampledFunction res(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) res(static_cast<Eigen::Index>(i)) = full(ext_index(i));
  return grid_norm(res, grid) / fnorm;
}

double q_identity_residual(const SpectralPoint& z, const SpectralPoint& z0,
                           const PointConfiguration& config, OverlapPath path,
                           const OverlapQuadrature& options) {
  const CMatrix o = overlap_matrix(z, z0, config.points(), path, options);
  const CMatrix lhs = q_matrix(z, config) - q_matrix(z0, config);
  if (o.size() == 0) return 0.0;
  return (lhs - (z.z() - z0.z()) * o).cwiseAbs().maxCoeff();
}

double transfer_identity_residual(const SpectralPoint& z, const SpectralPoint& z0,
                                  const Vec3& x0, const VolumeGrid& grid) {
  if (z.z() == z0.z()) {
    throw Error(ErrorKind::CoincidentSpectralPoints, "z and z0 coincide");
  }
  const SampledFunction source =
      sample(grid, [&](const Vec3& x) { return free_green(z0, (x - x0).norm()); });
  const SampledFunction expected = sample(grid, [&](const Vec3& x) {
    const double r = (x - x0).norm();
    return (free_green(z, r) - free_green(z0, r)) / (z.z() - z0.z());
  });
  const SampledFunction got = apply_free_resolvent(z, source, grid);
  return grid_norm(got - expected, grid) / grid_norm(expected, grid);
}

double smallest_singular_value(const SpectralPoint& z, const PointConfiguration& config,
                               const VolumeGrid& grid) {
  require_interior(z);
  if (grid.size() > 4096) {
    throw Error(ErrorKind::InvalidArgument, "dense resolvent diagnostic limited to 4096 nodes");
  }
  const auto m = static_cast<Eigen::Index>(grid.size());
  const PerturbedResolvent r(z, config, grid);
  CMatrix dense(m, m);
  SampledFunction e = SampledFunction::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    e(j) = 1.0;
    dense.col(j) = r.apply(e);
    e(j) = 0.0;
  }
  Eigen::BDCSVD<CMatrix> svd(dense);
  return svd.singularValues()(m - 1);
}

}  // namespace ks
