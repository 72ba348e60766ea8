#include "ks/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ks/linalg.hpp"

namespace ks {

double convention_scale(CouplingConvention convention) {
  return convention == CouplingConvention::FourPi ? 4.0 * pi : 1.0;
}

CouplingOperator CouplingOperator::diagonal(std::vector<double> weights,
                                            CouplingConvention convention) {
  CouplingOperator op;
  op.convention_ = convention;
  op.matrix_ = CMatrix::Zero(static_cast<Eigen::Index>(weights.size()),
                             static_cast<Eigen::Index>(weights.size()));
  for (std::size_t n = 0; n < weights.size(); ++n) {
    if (!std::isfinite(weights[n])) {
      throw Error(ErrorKind::InvalidArgument, "weight " + std::to_string(n) + " is not finite");
    }
    if (weights[n] == 0.0) {
      throw Error(ErrorKind::ZeroWeight, "weight " + std::to_string(n) + " is zero");
    }
    op.matrix_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = weights[n];
  }
  return op;
}

CouplingOperator CouplingOperator::hermitian(CMatrix matrix, CouplingConvention convention) {
  if (matrix.rows() != matrix.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "coupling matrix is not square");
  }
  if (!matrix.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "coupling matrix has non-finite entries");
  }
  const double scale = matrix.size() ? std::max(1.0, matrix.cwiseAbs().maxCoeff()) : 1.0;
  if (linalg::hermitian_defect(matrix) > 1e-12 * scale) {
    throw Error(ErrorKind::NonHermitianCoupling, "coupling matrix is not Hermitian");
  }
  CouplingOperator op;
  op.convention_ = convention;
  CMatrix adj = matrix.adjoint();
  op.matrix_ = 0.5 * (matrix + adj);
  op.real_ = linalg::is_real(op.matrix_);
  op.diagonal_ = true;
  for (Eigen::Index i = 0; i < op.matrix_.rows() && op.diagonal_; ++i) {
    for (Eigen::Index j = 0; j < op.matrix_.cols(); ++j) {
      if (i != j && op.matrix_(i, j) != 0.0) {
        op.diagonal_ = false;
        break;
      }
    }
  }
  return op;
}

std::vector<double> CouplingOperator::weights() const {
  std::vector<double> w(size());
  for (std::size_t n = 0; n < w.size(); ++n) {
    w[n] = matrix_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)).real();
  }
  return w;
}

CouplingOperator CouplingOperator::with_convention(CouplingConvention convention) const {
  CouplingOperator op = *this;
  op.convention_ = convention;
  return op;
}

SeparationData separation_sequence(std::span<const Vec3> points) {
  if (points.empty()) {
    throw Error(ErrorKind::EmptyConfiguration, "separation data needs at least one point");
  }
  SeparationData out;
  out.delta.resize(points.size());
  out.delta[0] = points[0].norm();
  double running = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < points.size(); ++n) {
    for (std::size_t j = 0; j < n; ++j) {
      running = std::min(running, (points[n] - points[j]).norm());
    }
    out.delta[n] = running;
  }
  if (points.size() >= 2) out.d = running;
  return out;
}

PointConfiguration::PointConfiguration(std::vector<Vec3> points, CouplingOperator coupling)
    : points_(std::move(points)), coupling_(std::move(coupling)) {
  if (coupling_.size() != points_.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "coupling has dimension " + std::to_string(coupling_.size()) + " but there are " +
                    std::to_string(points_.size()) + " points");
  }
  for (std::size_t n = 0; n < points_.size(); ++n) {
    if (!points_[n].allFinite()) {
      throw Error(ErrorKind::InvalidArgument, "point " + std::to_string(n) + " is not finite");
    }
  }
  for (std::size_t m = 0; m < points_.size(); ++m) {
    for (std::size_t n = m + 1; n < points_.size(); ++n) {
      if (points_[m] == points_[n]) {
        throw Error(ErrorKind::DuplicatePoint,
                    "points " + std::to_string(m) + " and " + std::to_string(n) + " coincide");
      }
      diameter_ = std::max(diameter_, (points_[m] - points_[n]).norm());
    }
  }
  if (points_.empty()) return;
  separation_ = separation_sequence(points_);
  for (std::size_t m = 0; m < points_.size(); ++m) {
    for (std::size_t n = m + 1; n < points_.size(); ++n) {
      if ((points_[m] - points_[n]).norm() < 1e-12 * diameter_) {
        warnings_.push_back("points " + std::to_string(m) + " and " + std::to_string(n) +
                            " are nearly coincident; Q will be ill-conditioned");
      }
    }
  }
}

PointConfiguration PointConfiguration::with_convention(CouplingConvention convention) const {
  PointConfiguration copy = *this;
  copy.coupling_ = coupling_.with_convention(convention);
  return copy;
}

PointConfiguration build_configuration(std::vector<Vec3> points, CouplingOperator coupling) {
  return PointConfiguration(std::move(points), std::move(coupling));
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::vector<std::size_t> default_truncation_orders(std::size_t n) {
  std::vector<std::size_t> orders;
  for (std::size_t div : {8u, 4u, 2u, 1u}) {
    const std::size_t k = std::max<std::size_t>(1, n / div);
    if (n == 0) break;
    if (orders.empty() || orders.back() != k) orders.push_back(k);
  }
  return orders;
}

namespace {

std::vector<std::size_t> normalized_orders(std::span<const std::size_t> orders, std::size_t n) {
  std::vector<std::size_t> out(orders.begin(), orders.end());
  if (out.empty()) out = default_truncation_orders(n);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (!out.empty() && out.back() > n) {
    throw Error(ErrorKind::DimensionMismatch, "truncation order exceeds family size");
  }
  return out;
}

struct RatioVerdict {
  Verdict verdict;
  double ratio;
  double tail;
};

RatioVerdict ratio_verdict(const std::vector<double>& sums) {
  const std::size_t k = sums.size();
  const double inc_prev = sums[k - 2] - sums[k - 3];
  const double inc_last = sums[k - 1] - sums[k - 2];
  if (inc_last == 0.0) return {Verdict::Pass, 0.0, 0.0};
  if (inc_prev == 0.0) return {Verdict::Fail, std::numeric_limits<double>::infinity(), 0.0};
  const double r = inc_last / inc_prev;
  if (r <= kPassRatio) return {Verdict::Pass, r, inc_last * r / (1.0 - r)};
  if (r >= kFailRatio) return {Verdict::Fail, r, std::numeric_limits<double>::infinity()};
  return {Verdict::Inconclusive, r, std::numeric_limits<double>::infinity()};
}

void finish_report(SummabilityReport& rep, FamilyExtent extent) {
  if (extent == FamilyExtent::Finite) {
    rep.verdict = Verdict::Pass;
    rep.tail_estimate = 0.0;
    return;
  }
  if (rep.orders.size() < 3) {
    rep.verdict = Verdict::Inconclusive;
    rep.tail_estimate = std::numeric_limits<double>::infinity();
    return;
  }
  const RatioVerdict a = ratio_verdict(rep.sum_b);
  const RatioVerdict b = ratio_verdict(rep.sum_b_over_delta);
  rep.ratio_b = a.ratio;
  rep.ratio_b_over_delta = b.ratio;
  if (a.verdict == Verdict::Fail || b.verdict == Verdict::Fail) {
    rep.verdict = Verdict::Fail;
  } else if (a.verdict == Verdict::Pass && b.verdict == Verdict::Pass) {
    rep.verdict = Verdict::Pass;
  } else {
    rep.verdict = Verdict::Inconclusive;
  }
  rep.tail_estimate = std::max(a.tail, b.tail);
}

void check_delta(std::span<const double> delta, std::size_t upto) {
  if (delta.size() < upto) {
    throw Error(ErrorKind::DimensionMismatch, "delta sequence shorter than truncation order");
  }
  for (std::size_t m = 0; m < upto; ++m) {
    if (!(delta[m] > 0.0)) {
      throw Error(ErrorKind::NegativeDelta,
                  "delta[" + std::to_string(m) + "] = " + std::to_string(delta[m]) +
                      " is not positive");
    }
  }
}

}  // namespace

SummabilityReport check_summability(std::span<const double> weights,
                                    std::span<const double> delta,
                                    std::span<const std::size_t> orders,
                                    FamilyExtent extent) {
  SummabilityReport rep;
  rep.orders = normalized_orders(orders, weights.size());
  const std::size_t upto = rep.orders.empty() ? 0 : rep.orders.back();
  check_delta(delta, upto);
  double sb = 0.0, sbd = 0.0;
  std::size_t n = 0;
  for (std::size_t k : rep.orders) {
    for (; n < k; ++n) {
      if (weights[n] == 0.0) {
        throw Error(ErrorKind::ZeroWeight, "weight " + std::to_string(n) + " is zero");
      }
      const double b = 1.0 / std::sqrt(std::abs(weights[n]));
      sb += b;
      sbd += b / delta[n];
    }
    rep.sum_b.push_back(sb);
    rep.sum_b_over_delta.push_back(sbd);
  }
  finish_report(rep, extent);
  return rep;
}

SummabilityReport check_summability(const CMatrix& b, std::span<const double> delta,
                                    std::span<const std::size_t> orders,
                                    FamilyExtent extent) {
  if (b.rows() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "b matrix is not square");
  }
  SummabilityReport rep;
  rep.orders = normalized_orders(orders, static_cast<std::size_t>(b.rows()));
  const std::size_t upto = rep.orders.empty() ? 0 : rep.orders.back();
  check_delta(delta, upto);
  for (std::size_t k : rep.orders) {
    const auto kk = static_cast<Eigen::Index>(k);
    double sb = 0.0, sbd = 0.0;
    for (Eigen::Index m = 0; m < kk; ++m) {
      for (Eigen::Index n = 0; n < kk; ++n) {
        const double v = std::abs(b(n, m));
        sb += v;
        sbd += v / delta[static_cast<std::size_t>(m)];
      }
    }
    rep.sum_b.push_back(sb);
    rep.sum_b_over_delta.push_back(sbd);
  }
  finish_report(rep, extent);
  return rep;
}

namespace {

Eigen::SelfAdjointEigenSolver<CMatrix> checked_eigen(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularL, "eigen-decomposition of L failed");
  }
  const RVector& mu = es.eigenvalues();
  if (mu.size() == 0) return es;
  const double top = mu.cwiseAbs().maxCoeff();
  if (!(mu.cwiseAbs().minCoeff() > 1e-14 * top)) {
    throw Error(ErrorKind::SingularL, "coupling operator L is singular");
  }
  return es;
}

}  // namespace

CMatrix inverse_sqrt_abs(const CMatrix& hermitian) {
  const auto es = checked_eigen(hermitian);
  RVector s = es.eigenvalues().cwiseAbs().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix sign_operator(const CMatrix& hermitian) {
  const auto es = checked_eigen(hermitian);
  RVector s = es.eigenvalues().unaryExpr([](double v) { return v > 0 ? 1.0 : -1.0; });
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace ks
