#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "ringdiode/params.hpp"

namespace ringdiode {

/// Uniform periodic grid x_j = -l/2 + j l/n on a ring of length l, with the
/// conjugate wavenumbers k_j = 2 pi m_j / l in standard DFT order
/// (m_j = j for j < n/2, j - n otherwise; the Nyquist mode is negative).
template <typename Scalar>
class RingGrid {
 public:
  using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  RingGrid(int n, Scalar length) : n_(n), length_(length) {
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("RingGrid: n must be a power of two");
    if (!(length > 0)) throw std::invalid_argument("RingGrid: length must be positive");
    x_.resize(n);
    k_.resize(n);
    const Scalar dk = Scalar(2 * M_PI) / length;
    for (int j = 0; j < n; ++j) {
      x_(j) = -length / 2 + j * dx();
      k_(j) = dk * mode_index(j);
    }
  }

  int size() const { return n_; }
  Scalar length() const { return length_; }
  Scalar dx() const { return length_ / n_; }
  Scalar dk() const { return Scalar(2 * M_PI) / length_; }
  Scalar k_max() const { return Scalar(M_PI) * n_ / length_; }

  /// Signed integer m of DFT slot j.
  int mode_index(int j) const { return j < n_ / 2 ? j : j - n_; }
  /// DFT slot of signed mode m (taken modulo n).
  int slot(int m) const { return ((m % n_) + n_) % n_; }

  const RealArray& x() const { return x_; }
  const RealArray& k() const { return k_; }
  Scalar x(int j) const { return x_(j); }
  Scalar k(int j) const { return k_(j); }

 private:
  int n_;
  Scalar length_;
  RealArray x_;
  RealArray k_;
};

/// Multi-level wavefunction sampled on a ring grid: one column per internal
/// level, n rows. Column-major storage keeps each level contiguous, which is
/// what the batched FFT expects.
template <typename Scalar>
class SpinorField {
 public:
  using Complex = std::complex<Scalar>;
  using Storage = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

  SpinorField() = default;
  SpinorField(int n, int levels, Scalar dx) : data_(Storage::Zero(n, levels)), dx_(dx) {
    if (levels != 2 && levels != 3) throw std::invalid_argument("SpinorField: levels must be 2 or 3");
  }

  int size() const { return static_cast<int>(data_.rows()); }
  int levels() const { return static_cast<int>(data_.cols()); }
  Scalar dx() const { return dx_; }

  auto level(int i) { return data_.col(i); }
  auto level(int i) const { return data_.col(i); }
  Storage& data() { return data_; }
  const Storage& data() const { return data_; }

 private:
  Storage data_;
  Scalar dx_ = 0;
};

using Grid = RingGrid<double>;
using Field = SpinorField<double>;

/// Sum over the listed levels of |amplitude|^2 dx.
template <typename Scalar>
Scalar level_weight(const SpinorField<Scalar>& f, std::initializer_list<int> levels) {
  Scalar w = 0;
  for (int l : levels)
    if (l < f.levels()) w += f.level(l).squaredNorm();
  return w * f.dx();
}

/// Sum over all levels and points of |amplitude|^2 dx.
template <typename Scalar>
Scalar squared_norm(const SpinorField<Scalar>& f) {
  return f.data().squaredNorm() * f.dx();
}

template <typename Scalar>
void normalize(SpinorField<Scalar>& f) {
  const Scalar n2 = squared_norm(f);
  if (!(n2 > 0)) throw std::runtime_error("normalize: field has zero norm");
  f.data() /= std::sqrt(n2);
}

/// Sum_levels |psi_level(x_j)|^2; integrates (times dx) to the weight in those
/// levels. Levels are zero-based.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> position_density(const SpinorField<Scalar>& f,
                                                          std::initializer_list<int> levels) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> p = Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(f.size());
  for (int l : levels)
    if (l < f.levels()) p += f.level(l).array().abs2();
  return p;
}

/// dx * sum of density over grid points with a <= x_j < b.
template <typename Scalar>
Scalar windowed_probability(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& density, const RingGrid<Scalar>& g,
                            Scalar a, Scalar b) {
  if (!(a < b)) throw std::invalid_argument("windowed_probability: window must satisfy a < b");
  Scalar sum = 0;
  for (int j = 0; j < g.size(); ++j)
    if (g.x(j) >= a && g.x(j) < b) sum += density(j);
  return sum * g.dx();
}

/// Free-Gaussian packet in level 1 (index 0) built from its momentum amplitude
///   Phi0(k) ~ exp[-(k-k0)^2/(4 dk^2) - i (k-k0)(x0 - hbar t0 k0/m) - i hbar t0 k^2/(2m)],
/// i.e. a packet centred on x0 at t = 0 that was focused a time t0 earlier.
/// Throws if more than 1e-8 of the momentum weight sits at the grid edge.
Field build_initial_packet(const ParameterSet& p, const Grid& g);

/// Position-space standard deviation of the initial packet,
/// sqrt((1/(2 dk))^2 + (hbar dk t0 / m)^2).
double initial_position_spread(const ParameterSet& p);

}  // namespace ringdiode
