#pragma once

#include <random>
#include <vector>

#include "ks/config.hpp"

namespace ks::test {

// Independent high-precision evaluations (mpmath, 30 digits).
namespace oracle {
inline constexpr double green_l1_rpi = -0.0253302959105844;
inline constexpr double green_zm1_r1 = 0.0292749157621596;
inline const cplx green_l4_r05{0.0859917827428636, 0.133924266700582};
inline const cplx q_diag_l1{0.0, 0.0795774715459477};
inline const cplx q_off_l1_r1{0.0429958913714318, 0.0669621333502909};
inline constexpr double overlap_diag_i_mi = 0.0562697697598191;
inline constexpr double four_pi_sin1 = 10.5742362563258;
inline const cplx plane_wave_l4{-0.0468329733575696, 0.102331913701354};
inline constexpr double one_over_two_pi = 0.159154943091895;
inline const cplx single_c{0.0795742804984808, -0.000503910017974592};
inline const cplx single_kernel{-6.38209493380217e-6, -0.00100782003594918};
inline const cplx single_det{0.999919800229766, -0.0126646400843142};
inline const cplx single_amplitude{-0.00633232004215711, 0.0000400998851170910};
inline constexpr double single_sigma = 5.03910017974592e-4;
inline constexpr double zeta2 = 1.64493406684823;
inline constexpr double partial_zeta2_200 = 1.63994654601500;
}  // namespace oracle

struct RandomConfig {
  std::vector<Vec3> points;
  std::vector<double> weights;
};

/// N in [1, max_n], points uniform in a cube of side `box`, weights with
/// random sign and modulus uniform in [0.2, 5].
inline RandomConfig random_config(std::mt19937_64& rng, int max_n = 8, double box = 6.0) {
  std::uniform_int_distribution<int> count(1, max_n);
  std::uniform_real_distribution<double> coord(-box / 2, box / 2);
  std::uniform_real_distribution<double> mag(0.2, 5.0);
  std::bernoulli_distribution sign(0.5);
  RandomConfig rc;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    rc.points.emplace_back(coord(rng), coord(rng), coord(rng));
    rc.weights.push_back(sign(rng) ? mag(rng) : -mag(rng));
  }
  return rc;
}

inline PointConfiguration make_config(const RandomConfig& rc,
                                      CouplingConvention conv = CouplingConvention::FourPi) {
  return build_configuration(rc.points, CouplingOperator::diagonal(rc.weights, conv));
}

inline double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace ks::test
