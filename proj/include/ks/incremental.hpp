#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ks/common.hpp"
#include "ks/config.hpp"
#include "ks/scattering.hpp"
#include "ks/sphere.hpp"

namespace ks {

/// Inverse C_N = (kappa_N + i gram_N)^{-1} for a diagonally coupled
/// configuration, grown or shrunk one carrier at a time by bordering.
class IncrementalState {
 public:
  static IncrementalState empty(double lambda,
                                CouplingConvention convention = CouplingConvention::FourPi);
  /// Direct inversion of the full denominator. Needs a real symmetric
  /// coupling (throws NonSymmetricCoupling otherwise).
  static IncrementalState from_configuration(double lambda, const PointConfiguration& config);

  double lambda() const noexcept { return lambda_; }
  CouplingConvention convention() const noexcept { return convention_; }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Vec3>& points() const noexcept { return points_; }
  /// Diagonal of L, or the full real symmetric L for states built from a
  /// configuration.
  const CMatrix& coupling() const noexcept { return coupling_; }
  const CMatrix& denominator_inverse() const noexcept { return inverse_; }
  /// Complex logarithm of det(kappa_N + i gram_N), accumulated step by step.
  cplx log_det() const noexcept { return log_det_; }
  /// Determinant ratio of the last carrier, d_N = det W_N / det W_{N-1}.
  cplx last_ratio() const noexcept { return last_ratio_; }

  /// Denominator rebuilt from scratch (for diagnostics and oracles).
  CMatrix denominator() const;
  PointConfiguration configuration() const;

 private:
  friend IncrementalState add_point(const IncrementalState&, const Vec3&, double);
  friend IncrementalState remove_last_point(const IncrementalState&);

  double lambda_ = 0.0;
  CouplingConvention convention_ = CouplingConvention::FourPi;
  std::vector<Vec3> points_;
  CMatrix coupling_;
  CMatrix inverse_;
  cplx log_det_ = 0.0;
  cplx last_ratio_ = 0.0;
};

/// Data of the last bordering step, sampled on a sphere grid.
struct UpdateData {
  /// xi = C_{N+1} e_{N+1}.
  CVector xi;
  /// d_{N+1} = det W_{N+1} / det W_N (the Schur complement).
  cplx d = 0.0;
  /// f(n) = sum_j xi_j q_j(n).
  SphereFunction f;
  /// w(n) = q_{N+1}(n) - sum_{jk} ((kappa_N - i gram_N)^{-1})_jk conj(g(x_k - x_{N+1})) q_j(n).
  SphereFunction w_vec;
  int n_theta = 0;
  int n_phi = 0;
};

/// Borders C_N with the new carrier in O(N^2). Throws DuplicatePoint,
/// ZeroWeight or DegenerateSchur.
IncrementalState add_point(const IncrementalState& state, const Vec3& x_new, double w_new);

/// Convenience overload returning the update data on `grid` as well.
std::pair<IncrementalState, UpdateData> add_point(const IncrementalState& state,
                                                  const Vec3& x_new, double w_new,
                                                  const SphereGrid& grid);

/// Drops the last carrier via C_N = [C_{N+1} - xi xi^T / xi_{N+1}]_{N x N}.
IncrementalState remove_last_point(const IncrementalState& state);

/// Update data of the last carrier of `state` (N+1 >= 1).
UpdateData update_data(const IncrementalState& state, const SphereGrid& grid);

/// Pairing of the second factor in a rank-one correction.
enum class Pairing {
  /// As printed: conj(f(n')) resp. J w inside the functional.
  Literal,
  /// Antipodal partner: conj((J f)(n')) resp. plain w.
  Antipodal,
};

/// Form of a rank-one correction: d_{N+1} raised to `d_exponent`.
struct UpdateForm {
  int d_exponent = 1;
  Pairing pairing = Pairing::Antipodal;

  bool operator==(const UpdateForm&) const = default;
};

std::string describe(const UpdateForm& form);

/// Forms selected by comparison with direct assembly (see
/// resolve_rank_one_form and friends).
inline constexpr UpdateForm kRankOneForm{1, Pairing::Antipodal};
inline constexpr UpdateForm kCompositionForm{-1, Pairing::Antipodal};
inline constexpr UpdateForm kDetRecursionForm{-1, Pairing::Antipodal};

/// K_{N+1} = K_N - 2i d^p f(n) conj(v(n')) with v = f (Literal) or J f.
CMatrix s_rank_one_update(const CMatrix& kernel_n, const UpdateData& update,
                          const SphereGrid& grid, UpdateForm form = kRankOneForm);

/// S_{N+1} = S_N [I - 2i d^p (., w) u] on the grid with u = J w (Literal)
/// or u = w. `s_n` is the grid matrix of S_N (see s_grid_matrix).
CMatrix s_composition_update(const CMatrix& s_n, const UpdateData& update,
                             const SphereGrid& grid, UpdateForm form = kCompositionForm);

/// det S_{N+1} = det S_N [1 - 2i d^p (u, w)] with u = J w (Literal) or w.
cplx det_recursion(cplx det_n, const UpdateData& update, const SphereGrid& grid,
                   UpdateForm form = kDetRecursionForm);

struct FormCandidate {
  UpdateForm form;
  double deviation;
};

struct FormResolution {
  UpdateForm best;
  double best_deviation;
  std::vector<FormCandidate> candidates;
};

/// Candidates: exponents -1, 0, 1 times both pairings. Deviations are
/// max-norm against the directly assembled kernel K_{N+1}.
FormResolution resolve_rank_one_form(const CMatrix& kernel_n, const CMatrix& kernel_next,
                                     const UpdateData& update, const SphereGrid& grid);

/// Deviation in max-norm against the grid matrix of S_{N+1}.
FormResolution resolve_composition_form(const CMatrix& s_n, const CMatrix& s_next,
                                        const UpdateData& update, const SphereGrid& grid);

/// Relative deviation against det S_{N+1}.
FormResolution resolve_det_recursion_form(cplx det_n, cplx det_next, const UpdateData& update,
                                          const SphereGrid& grid);

}  // namespace ks
