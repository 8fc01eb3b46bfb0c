#pragma once

#include <fftw3.h>

#include "ringdiode/grid.hpp"

namespace ringdiode {

/// In-place batched DFT over all levels of a Field of fixed shape.
///
/// forward():  psi(x_j) -> c_m = n^{-1/2} sum_j psi_j exp(-2 pi i m j / n)
/// inverse():  the exact inverse of forward().
///
/// Both are unitary, so squared_norm() is preserved. The x-origin offset
/// -l/2 only contributes a (-1)^m phase, which no momentum-space observable
/// sees; build_initial_packet accounts for it explicitly.
///
/// Plans use FFTW_ESTIMATE so the arithmetic (and thus every output bit) is
/// reproducible from run to run. Planning is serialized internally; execution
/// is safe from concurrent threads on distinct fields.
class SpectralTransform {
 public:
  SpectralTransform(int n, int levels);
  ~SpectralTransform();
  SpectralTransform(SpectralTransform&& other) noexcept;
  SpectralTransform& operator=(SpectralTransform&& other) noexcept;
  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;

  int size() const { return n_; }
  int levels() const { return levels_; }

  /// Unnormalized transforms: forward_raw then inverse_raw multiplies by n.
  void forward_raw(Field& f) const;
  void inverse_raw(Field& f) const;

  void forward(Field& f) const;
  void inverse(Field& f) const;

 private:
  fftw_complex* check(Field& f) const;
  void destroy();

  int n_ = 0;
  int levels_ = 0;
  int alignment_ = 0;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

/// Copying conveniences; they plan a fresh transform and are meant for
/// analysis and tests, not the inner loop.
Field to_momentum(const Field& f);
Field to_position(const Field& f);

/// Momentum-space weight per mode (rows) and level (columns): dx |c_m|^2.
/// Sums to the squared norm of the position-space field.
Eigen::ArrayXXd momentum_weights(const Field& momentum_field);

}  // namespace ringdiode
