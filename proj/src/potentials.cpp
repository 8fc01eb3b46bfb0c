#include "ringdiode/potentials.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>

namespace ringdiode {

using namespace std::complex_literals;

PotentialProfiles evaluate_profiles(const ParameterSet& p, const Grid& g) {
  const int n = g.size();
  const double l = g.length();
  const double sigma_rabi_Q = rabi_width_from_quench_width(p.sigma_Q);
  PotentialProfiles out;
  out.W1.resize(n);
  out.W2.resize(n);
  out.W_T.resize(n);
  out.W_Q.resize(n);
  out.omega_P.resize(n);
  out.omega_Q.resize(n);
  for (int j = 0; j < n; ++j) {
    const double x = g.x(j);
    out.W1(j) = p.W1_hat * ring_gaussian(x, p.x_W1, p.sigma, l);
    out.W2(j) = p.W2_hat * ring_gaussian(x, p.x_W2, p.sigma, l);
    out.W_T(j) = p.W_T_hat * ring_gaussian(x, p.x_T, p.sigma_T, l);
    out.W_Q(j) = p.W_Q_hat * ring_gaussian(x, p.x_Q, p.sigma_Q, l);
    out.omega_P(j) = p.omega_P_hat * ring_gaussian(x, p.x_P, p.sigma, l);
    out.omega_Q(j) = p.omega_Q_hat * ring_gaussian(x, p.x_Q, sigma_rabi_Q, l);
  }
  return out;
}

Eigen::Matrix2cd expm_2x2(const Eigen::Matrix2cd& A, double tau) {
  // A = mu I + N with N traceless, so N^2 = delta^2 I.
  const std::complex<double> mu = 0.5 * (A(0, 0) + A(1, 1));
  Eigen::Matrix2cd N = A;
  N(0, 0) -= mu;
  N(1, 1) -= mu;
  const std::complex<double> delta = std::sqrt(N(0, 0) * N(0, 0) + N(0, 1) * N(1, 0));
  const std::complex<double> z = tau * delta;
  std::complex<double> sinc_tau;  // sin(tau delta) / delta
  if (std::abs(z) < 1e-4)
    sinc_tau = tau * (1.0 - z * z / 6.0 + z * z * z * z / 120.0);
  else
    sinc_tau = std::sin(z) / delta;
  Eigen::Matrix2cd out = std::cos(z) * Eigen::Matrix2cd::Identity() - 1i * sinc_tau * N;
  return std::exp(-1i * tau * mu) * out;
}

Eigen::Matrix3cd expm_3x3_strang(const Eigen::Matrix3d& H, double G, double tau) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H);
  const Eigen::Matrix3cd U = es.eigenvectors().cast<std::complex<double>>();
  const Eigen::Vector3cd phases = (-1i * tau * es.eigenvalues().cast<std::complex<double>>()).array().exp();
  const Eigen::Matrix3cd herm = U * phases.asDiagonal() * U.transpose();
  // Half the absorber on each side: exp(-tau G / 4) on level 3.
  Eigen::Vector3cd absorb(1.0, 1.0, std::exp(-tau * G / 4));
  return absorb.asDiagonal() * herm * absorb.asDiagonal();
}

Eigen::Matrix3cd expm_3x3_exact(const Eigen::Matrix3d& H, double G, double tau) {
  Eigen::Matrix3cd A = H.cast<std::complex<double>>();
  A(2, 2) -= 0.5i * G;
  const Eigen::Matrix3cd E = -1i * tau * A;
  return E.exp();
}

Eigen::MatrixXcd PotentialTable::rate_matrix(int j) const {
  Eigen::MatrixXcd m(levels, levels);
  for (int r = 0; r < levels; ++r)
    for (int c = 0; c < levels; ++c) m(r, c) = rates(j, r * levels + c);
  return m;
}

Eigen::MatrixXcd PotentialTable::half_step_matrix(int j) const {
  Eigen::MatrixXcd m(levels, levels);
  for (int r = 0; r < levels; ++r)
    for (int c = 0; c < levels; ++c) m(r, c) = half_step(j, r * levels + c);
  return m;
}

void PotentialTable::apply_half_step(Field& f) const {
  auto& d = f.data();
  const Eigen::Index n = half_step.rows();
  if (d.rows() != n || d.cols() != levels) throw std::invalid_argument("PotentialTable: field shape does not match");
  if (levels == 2) {
    std::complex<double>* a = d.col(0).data();
    std::complex<double>* b = d.col(1).data();
    const std::complex<double>* p00 = half_step.col(0).data();
    const std::complex<double>* p01 = half_step.col(1).data();
    const std::complex<double>* p10 = half_step.col(2).data();
    const std::complex<double>* p11 = half_step.col(3).data();
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::complex<double> u = a[j], v = b[j];
      a[j] = p00[j] * u + p01[j] * v;
      b[j] = p10[j] * u + p11[j] * v;
    }
  } else {
    std::complex<double>* a = d.col(0).data();
    std::complex<double>* b = d.col(1).data();
    std::complex<double>* c = d.col(2).data();
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::complex<double> u = a[j], v = b[j], w = c[j];
      a[j] = half_step(j, 0) * u + half_step(j, 1) * v + half_step(j, 2) * w;
      b[j] = half_step(j, 3) * u + half_step(j, 4) * v + half_step(j, 5) * w;
      c[j] = half_step(j, 6) * u + half_step(j, 7) * v + half_step(j, 8) * w;
    }
  }
}

PotentialTable assemble_potential(const ParameterSet& p, const Grid& g, Mode mode) {
  if (mode == Mode::classical) throw std::invalid_argument("assemble_potential: classical mode has no potential table");
  if (mode == Mode::three_level && !(p.gamma3 > 0))
    throw std::invalid_argument("assemble_potential: three_level mode requires gamma3 > 0");

  const PotentialProfiles prof = evaluate_profiles(p, g);
  const int n = g.size();
  PotentialTable t;
  t.levels = mode == Mode::three_level ? 3 : 2;
  t.dt = p.dt;
  t.gamma3 = mode == Mode::three_level ? p.gamma3 : 0.0;
  const int L = t.levels;
  t.rates.resize(n, L * L);
  t.half_step.resize(n, L * L);
  t.quench_amplitude = prof.W_Q.sqrt();

  // Half step of duration dt/2 under V/hbar = M/2: exponent -i (dt/4) M.
  const double tau = p.dt / 4;
  for (int j = 0; j < n; ++j) {
    if (L == 2) {
      Eigen::Matrix2cd M;
      M << prof.W1(j) + prof.W_T(j), prof.omega_P(j), prof.omega_P(j),
          std::complex<double>(prof.W2(j), -prof.W_Q(j));
      const Eigen::Matrix2cd P = expm_2x2(M, tau);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          t.rates(j, r * 2 + c) = M(r, c);
          t.half_step(j, r * 2 + c) = P(r, c);
        }
    } else {
      Eigen::Matrix3d M;
      M << prof.W1(j) + prof.W_T(j), prof.omega_P(j), 0.0, prof.omega_P(j), prof.W2(j), prof.omega_Q(j), 0.0,
          prof.omega_Q(j), 0.0;
      // In units of M, the absorber -i gamma3/2 |3><3| of V/hbar is -i gamma3 |3><3|.
      const Eigen::Matrix3cd P = p.absorber_splitting == AbsorberSplitting::strang
                                     ? expm_3x3_strang(M, 2 * t.gamma3, tau)
                                     : expm_3x3_exact(M, 2 * t.gamma3, tau);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          t.rates(j, r * 3 + c) = M(r, c);
          t.half_step(j, r * 3 + c) = P(r, c);
        }
    }
  }
  return t;
}

}  // namespace ringdiode
