#pragma once

#include <Eigen/Dense>

#include <complex>

#include "ringdiode/grid.hpp"
#include "ringdiode/params.hpp"

namespace ringdiode {

/// exp(-(x - x0)^2 / (2 sigma^2)); the bare profile, no wrapping.
inline double gaussian_profile(double x, double x0, double sigma) {
  const double d = x - x0;
  return std::exp(-d * d / (2 * sigma * sigma));
}

/// Signed minimum-image separation x - x0 on a ring of length l.
inline double ring_separation(double x, double x0, double l) {
  double d = std::fmod(x - x0, l);
  if (d >= l / 2) d -= l;
  if (d < -l / 2) d += l;
  return d;
}

/// The Gaussian profile evaluated on the ring's minimum-image distance, which
/// keeps every potential continuous across the seam at x = -l/2.
inline double ring_gaussian(double x, double x0, double sigma, double l) {
  const double d = ring_separation(x, x0, l);
  return std::exp(-d * d / (2 * sigma * sigma));
}

/// Laser profiles on the grid, all in 1/s.
struct PotentialProfiles {
  Eigen::ArrayXd W1, W2, W_T, W_Q, omega_P, omega_Q;
};

PotentialProfiles evaluate_profiles(const ParameterSet& p, const Grid& g);

/// Pointwise potential and its half-step propagator for the split-step scheme.
///
/// Entry (r, c) of the per-point matrix lives in column r * levels + c. The
/// rate matrix M is such that V = (hbar/2) M; in the two-level model M(1,1)
/// carries -i W_Q, while in the three-level model the decay -i hbar gamma3/2
/// |3><3| is tracked separately in `gamma3`.
struct PotentialTable {
  int levels = 2;
  double dt = 0;
  double gamma3 = 0;
  Eigen::ArrayXXcd rates;      ///< M(x_j), n x levels^2
  Eigen::ArrayXXcd half_step;  ///< exp(-i (dt/2) V_eff / hbar), n x levels^2
  Eigen::ArrayXd quench_amplitude;  ///< sqrt(W_Q(x_j)), the two-level jump amplitude

  int size() const { return static_cast<int>(rates.rows()); }

  /// Matrices at one grid point, for inspection.
  Eigen::MatrixXcd rate_matrix(int j) const;
  Eigen::MatrixXcd half_step_matrix(int j) const;

  /// psi(x_j) <- P(x_j) psi(x_j) at every grid point.
  void apply_half_step(Field& f) const;
};

/// Builds the table for the requested model. `mode` must be two_level or
/// three_level and consistent with the parameters (three_level needs
/// gamma3 > 0).
PotentialTable assemble_potential(const ParameterSet& p, const Grid& g, Mode mode);

/// exp(-i tau A) for a complex 2x2 matrix, closed form.
Eigen::Matrix2cd expm_2x2(const Eigen::Matrix2cd& A, double tau);

/// exp(-i tau (H - i G/2 |3><3|)) with real symmetric H, by Strang splitting
/// of the absorber around the Hermitian part (eigendecomposition).
Eigen::Matrix3cd expm_3x3_strang(const Eigen::Matrix3d& H, double G, double tau);

/// Same exponential without splitting.
Eigen::Matrix3cd expm_3x3_exact(const Eigen::Matrix3d& H, double G, double tau);

}  // namespace ringdiode
