#include "ks/incremental.hpp"

#include <cmath>
#include <limits>

#include "ks/greens.hpp"
#include "ks/linalg.hpp"

namespace ks {

IncrementalState IncrementalState::empty(double lambda, CouplingConvention convention) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::NonpositiveEnergy, "scattering energy must be positive");
  }
  IncrementalState s;
  s.lambda_ = lambda;
  s.convention_ = convention;
  s.coupling_ = CMatrix(0, 0);
  s.inverse_ = CMatrix(0, 0);
  return s;
}

IncrementalState IncrementalState::from_configuration(double lambda,
                                                      const PointConfiguration& config) {
  if (!config.coupling().is_real_symmetric()) {
    throw Error(ErrorKind::NonSymmetricCoupling,
                "incremental updates need a real symmetric coupling");
  }
  IncrementalState s = empty(lambda, config.coupling().convention());
  s.points_ = config.points();
  s.coupling_ = config.coupling().matrix();
  const CMatrix w = s.denominator();
  double cond = 1.0;
  s.inverse_ = linalg::checked_inverse(w, &cond);
  linalg::symmetrize(s.inverse_);
  s.log_det_ = linalg::log_determinant(w);
  if (s.size() > 0) {
    const auto last = static_cast<Eigen::Index>(s.size() - 1);
    s.last_ratio_ = 1.0 / s.inverse_(last, last);
  }
  return s;
}

CMatrix IncrementalState::denominator() const {
  const CMatrix q = q_matrix(SpectralPoint::boundary_plus(lambda_), points_);
  return q + convention_scale(convention_) * coupling_;
}

PointConfiguration IncrementalState::configuration() const {
  return build_configuration(points_, CouplingOperator::hermitian(coupling_, convention_));
}

IncrementalState add_point(const IncrementalState& state, const Vec3& x_new, double w_new) {
  if (w_new == 0.0) throw Error(ErrorKind::ZeroWeight, "new weight is zero");
  if (!std::isfinite(w_new) || !x_new.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "new carrier or weight is not finite");
  }
  for (const Vec3& x : state.points_) {
    if (x == x_new) throw Error(ErrorKind::DuplicatePoint, "new carrier coincides with an existing one");
  }
  const auto n = static_cast<Eigen::Index>(state.size());
  const SpectralPoint lp = SpectralPoint::boundary_plus(state.lambda_);
  const double c = convention_scale(state.convention_);

  CVector b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    b(k) = free_green(lp, (state.points_[static_cast<std::size_t>(k)] - x_new).norm());
  }
  const cplx a = I * lp.sqrt_z() / (4.0 * pi) + c * w_new;
  const CVector v = state.inverse_ * b;
  const cplx btv = n ? (b.transpose() * v)(0, 0) : cplx(0.0);
  const cplx schur = a - btv;
  if (std::abs(schur) < 1e-14 * (std::abs(a) + std::abs(btv))) {
    throw Error(ErrorKind::DegenerateSchur,
                "Schur complement vanishes: new carrier is resonant with the configuration");
  }

  IncrementalState next = state;
  next.points_.push_back(x_new);
  next.coupling_ = CMatrix::Zero(n + 1, n + 1);
  next.coupling_.topLeftCorner(n, n) = state.coupling_;
  next.coupling_(n, n) = w_new;
  next.inverse_.resize(n + 1, n + 1);
  next.inverse_.topLeftCorner(n, n) = state.inverse_ + v * v.transpose() / schur;
  next.inverse_.topRightCorner(n, 1) = -v / schur;
  next.inverse_.bottomLeftCorner(1, n) = -v.transpose() / schur;
  next.inverse_(n, n) = 1.0 / schur;
  next.log_det_ = state.log_det_ + std::log(schur);
  next.last_ratio_ = schur;
  return next;
}

std::pair<IncrementalState, UpdateData> add_point(const IncrementalState& state,
                                                  const Vec3& x_new, double w_new,
                                                  const SphereGrid& grid) {
  IncrementalState next = add_point(state, x_new, w_new);
  UpdateData upd = update_data(next, grid);
  return {std::move(next), std::move(upd)};
}

IncrementalState remove_last_point(const IncrementalState& state) {
  if (state.size() == 0) {
    throw Error(ErrorKind::EmptyConfiguration, "no carrier to remove");
  }
  const auto n = static_cast<Eigen::Index>(state.size() - 1);
  const CMatrix& c = state.inverse_;
  const cplx xi_last = c(n, n);
  if (!(std::abs(xi_last) > 1e-14 * c.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::DegenerateSchur, "last diagonal entry of the inverse vanishes");
  }
  IncrementalState prev = state;
  prev.points_.pop_back();
  prev.coupling_ = state.coupling_.topLeftCorner(n, n);
  prev.inverse_ = c.topLeftCorner(n, n) - c.topRightCorner(n, 1) * c.bottomLeftCorner(1, n) / xi_last;
  prev.log_det_ = state.log_det_ - std::log(state.last_ratio_);
  prev.last_ratio_ = n ? 1.0 / prev.inverse_(n - 1, n - 1) : cplx(0.0);
  return prev;
}

UpdateData update_data(const IncrementalState& state, const SphereGrid& grid) {
  if (state.size() == 0) {
    throw Error(ErrorKind::EmptyConfiguration, "update data needs at least one carrier");
  }
  const auto n = static_cast<Eigen::Index>(state.size() - 1);
  UpdateData upd;
  upd.n_theta = grid.n_theta();
  upd.n_phi = grid.n_phi();
  upd.xi = state.denominator_inverse().col(n);
  upd.d = state.last_ratio();

  const PlaneWaveVectors pw = plane_wave_vectors(state.lambda(), state.points(), grid);
  upd.f = pw.q.transpose() * upd.xi;

  const CMatrix c_prev = remove_last_point(state).denominator_inverse();
  const CVector b = state.denominator().col(n).head(n);
  const CVector coef = c_prev.conjugate() * b.conjugate();
  upd.w_vec = pw.q.row(n).transpose();
  if (n > 0) upd.w_vec -= pw.q.topRows(n).transpose() * coef;
  return upd;
}

std::string describe(const UpdateForm& form) {
  return "d^" + std::to_string(form.d_exponent) + ", " +
         (form.pairing == Pairing::Literal ? "literal pairing" : "antipodal pairing");
}

namespace {

void require_layout(const UpdateData& upd, const SphereGrid& grid, Eigen::Index rows) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (upd.n_theta != grid.n_theta() || upd.n_phi != grid.n_phi() || upd.f.size() != m ||
      upd.w_vec.size() != m || rows != m) {
    throw Error(ErrorKind::GridMismatch, "update data and operator live on different grids");
  }
}

cplx d_power(cplx d, int p) {
  cplx out = 1.0;
  for (int i = 0; i < std::abs(p); ++i) out *= d;
  return p < 0 ? 1.0 / out : out;
}

template <typename Deviation>
FormResolution resolve_forms(Deviation deviation) {
  FormResolution res;
  res.best_deviation = std::numeric_limits<double>::infinity();
  for (Pairing pairing : {Pairing::Antipodal, Pairing::Literal}) {
    for (int p : {-1, 0, 1}) {
      const UpdateForm form{p, pairing};
      const double dev = deviation(form);
      res.candidates.push_back({form, dev});
      if (dev < res.best_deviation) {
        res.best_deviation = dev;
        res.best = form;
      }
    }
  }
  return res;
}

}  // namespace

CMatrix s_rank_one_update(const CMatrix& kernel_n, const UpdateData& update,
                          const SphereGrid& grid, UpdateForm form) {
  require_layout(update, grid, kernel_n.rows());
  if (kernel_n.cols() != kernel_n.rows()) {
    throw Error(ErrorKind::GridMismatch, "kernel matrix is not square");
  }
  const SphereFunction partner =
      form.pairing == Pairing::Literal ? SphereFunction(update.f) : j_conjugate(update.f, grid);
  const cplx alpha = -2.0 * I * d_power(update.d, form.d_exponent);
  return kernel_n + alpha * update.f * partner.adjoint();
}

CMatrix s_composition_update(const CMatrix& s_n, const UpdateData& update,
                             const SphereGrid& grid, UpdateForm form) {
  require_layout(update, grid, s_n.rows());
  const SphereFunction u =
      form.pairing == Pairing::Literal ? j_conjugate(update.w_vec, grid) : SphereFunction(update.w_vec);
  const cplx alpha = -2.0 * I * d_power(update.d, form.d_exponent);
  // S_N (I + alpha u (W conj w)^T) = S_N + alpha (S_N u)(W conj w)^T
  const CVector functional = grid.weights().cast<cplx>().cwiseProduct(update.w_vec.conjugate());
  return s_n + alpha * (s_n * u) * functional.transpose();
}

cplx det_recursion(cplx det_n, const UpdateData& update, const SphereGrid& grid,
                   UpdateForm form) {
  require_layout(update, grid, static_cast<Eigen::Index>(grid.size()));
  const SphereFunction u =
      form.pairing == Pairing::Literal ? j_conjugate(update.w_vec, grid) : SphereFunction(update.w_vec);
  const cplx factor = 1.0 - 2.0 * I * d_power(update.d, form.d_exponent) *
                                inner_product(u, update.w_vec, grid);
  return det_n * factor;
}

FormResolution resolve_rank_one_form(const CMatrix& kernel_n, const CMatrix& kernel_next,
                                     const UpdateData& update, const SphereGrid& grid) {
  return resolve_forms([&](UpdateForm form) {
    return (s_rank_one_update(kernel_n, update, grid, form) - kernel_next).cwiseAbs().maxCoeff();
  });
}

FormResolution resolve_composition_form(const CMatrix& s_n, const CMatrix& s_next,
                                        const UpdateData& update, const SphereGrid& grid) {
  return resolve_forms([&](UpdateForm form) {
    return (s_composition_update(s_n, update, grid, form) - s_next).cwiseAbs().maxCoeff();
  });
}

FormResolution resolve_det_recursion_form(cplx det_n, cplx det_next, const UpdateData& update,
                                          const SphereGrid& grid) {
  return resolve_forms([&](UpdateForm form) {
    return std::abs(det_recursion(det_n, update, grid, form) - det_next) / std::abs(det_next);
  });
}

}  // namespace ks
