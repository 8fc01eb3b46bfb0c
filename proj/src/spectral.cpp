#include "ringdiode/spectral.hpp"

#include <mutex>
#include <stdexcept>
#include <utility>

namespace ringdiode {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

SpectralTransform::SpectralTransform(int n, int levels) : n_(n), levels_(levels) {
  // Plan on a scratch field so the plan's alignment assumptions match those
  // of every Eigen-allocated field of this shape.
  Field scratch(n, levels, 1.0);
  auto* data = as_fftw(scratch.data().data());
  alignment_ = fftw_alignment_of(reinterpret_cast<double*>(data));
  int dims[1] = {n};
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_many_dft(1, dims, levels, data, nullptr, 1, n, data, nullptr, 1, n, FFTW_FORWARD,
                                FFTW_ESTIMATE);
  inverse_ = fftw_plan_many_dft(1, dims, levels, data, nullptr, 1, n, data, nullptr, 1, n, FFTW_BACKWARD,
                                FFTW_ESTIMATE);
  if (!forward_ || !inverse_) {
    destroy();
    throw std::runtime_error("SpectralTransform: FFTW planning failed");
  }
}

SpectralTransform::~SpectralTransform() { destroy(); }

SpectralTransform::SpectralTransform(SpectralTransform&& other) noexcept
    : n_(other.n_),
      levels_(other.levels_),
      alignment_(other.alignment_),
      forward_(std::exchange(other.forward_, nullptr)),
      inverse_(std::exchange(other.inverse_, nullptr)) {}

SpectralTransform& SpectralTransform::operator=(SpectralTransform&& other) noexcept {
  if (this != &other) {
    destroy();
    n_ = other.n_;
    levels_ = other.levels_;
    alignment_ = other.alignment_;
    forward_ = std::exchange(other.forward_, nullptr);
    inverse_ = std::exchange(other.inverse_, nullptr);
  }
  return *this;
}

void SpectralTransform::destroy() {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(forward_);
  if (inverse_) fftw_destroy_plan(inverse_);
  forward_ = inverse_ = nullptr;
}

fftw_complex* SpectralTransform::check(Field& f) const {
  if (f.size() != n_ || f.levels() != levels_)
    throw std::invalid_argument("SpectralTransform: field shape does not match the plan");
  auto* data = as_fftw(f.data().data());
  if (fftw_alignment_of(reinterpret_cast<double*>(data)) != alignment_)
    throw std::runtime_error("SpectralTransform: field alignment does not match the plan");
  return data;
}

void SpectralTransform::forward_raw(Field& f) const {
  auto* d = check(f);
  fftw_execute_dft(forward_, d, d);
}

void SpectralTransform::inverse_raw(Field& f) const {
  auto* d = check(f);
  fftw_execute_dft(inverse_, d, d);
}

void SpectralTransform::forward(Field& f) const {
  forward_raw(f);
  f.data() *= 1.0 / std::sqrt(static_cast<double>(n_));
}

void SpectralTransform::inverse(Field& f) const {
  inverse_raw(f);
  f.data() *= 1.0 / std::sqrt(static_cast<double>(n_));
}

Field to_momentum(const Field& f) {
  Field out = f;
  SpectralTransform(f.size(), f.levels()).forward(out);
  return out;
}

Field to_position(const Field& f) {
  Field out = f;
  SpectralTransform(f.size(), f.levels()).inverse(out);
  return out;
}

Eigen::ArrayXXd momentum_weights(const Field& momentum_field) {
  return momentum_field.data().array().abs2() * momentum_field.dx();
}

}  // namespace ringdiode
