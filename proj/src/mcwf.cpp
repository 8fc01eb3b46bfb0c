#include "ringdiode/mcwf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ringdiode {

using namespace std::complex_literals;

Propagator::Propagator(const PotentialTable& pot, const Grid& g, double hbar_over_m)
    : pot_(&pot), fft_(g.size(), pot.levels), dt_(pot.dt) {
  if (pot.size() != g.size()) throw std::invalid_argument("Propagator: potential table and grid differ in size");
  const double inv_n = 1.0 / g.size();
  kinetic_.resize(g.size());
  for (int j = 0; j < g.size(); ++j) {
    const double k = g.k(j);
    kinetic_(j) = std::polar(inv_n, -0.5 * dt_ * hbar_over_m * k * k);
  }
}

void Propagator::advance(Field& f) const {
  pot_->apply_half_step(f);
  fft_.forward_raw(f);
  f.data().array().colwise() *= kinetic_;
  fft_.inverse_raw(f);
  pot_->apply_half_step(f);
}

void split_step(TrajectoryState& s, const Propagator& prop) {
  prop.advance(s.field);
  s.t += prop.dt();
  s.survival = squared_norm(s.field);
}

double recoil_wavenumber(double u, const ParameterSet& p, const Grid& g) {
  const double kappa = p.v_rec * u / p.hbar_over_m();
  if (!p.commensurate_recoil) return kappa;
  return std::round(kappa / g.dk()) * g.dk();
}

void apply_reset(TrajectoryState& s, double u, double t_jump, const ParameterSet& p, const Grid& g,
                 const PotentialTable& pot, Rng& rng) {
  auto& d = s.field.data();
  const double kappa = recoil_wavenumber(u, p, g);
  const Eigen::ArrayXcd kick = (1i * kappa * g.x().array()).exp();
  if (s.field.levels() == 3) {
    d.col(0).array() = kick * d.col(2).array();
    d.col(1).setZero();
    d.col(2).setZero();
  } else {
    d.col(0).array() = -1i * pot.quench_amplitude * kick * d.col(1).array();
    d.col(1).setZero();
  }
  const double n2 = squared_norm(s.field);
  if (!(n2 > 0)) {
    std::ostringstream msg;
    msg << "apply_reset: jump at t = " << t_jump << " s left a zero field (no excited amplitude)";
    throw std::runtime_error(msg.str());
  }
  s.field.data() /= std::sqrt(n2);
  s.survival = 1.0;
  s.jump_log.push_back({t_jump, u});
  s.jump_threshold = open_unit(rng);
}

std::vector<double> sample_times(const ParameterSet& p) {
  std::vector<double> out;
  const long count = std::lround(std::floor(p.t_final / p.sample_interval + 1e-9));
  for (long k = 0; k <= count; ++k) out.push_back(k * p.sample_interval);
  return out;
}

TrajectoryRecord run_trajectory(const ParameterSet& p, const Grid& g, const Propagator& prop, Rng& rng,
                                const TrajectoryObserver& observer) {
  TrajectoryState s;
  s.field = build_initial_packet(p, g);
  s.survival = squared_norm(s.field);
  return run_trajectory_from(std::move(s), p, g, prop, rng, observer);
}

TrajectoryRecord run_trajectory_from(TrajectoryState s, const ParameterSet& p, const Grid& g,
                                     const Propagator& prop, Rng& rng, const TrajectoryObserver& observer) {
  if (p.mode == Mode::classical) throw std::invalid_argument("run_trajectory: needs a quantum mode");
  const double dt = prop.dt();
  const long total_steps = std::lround(p.t_final / dt);
  const long stride = std::lround(p.sample_interval / dt);
  if (stride < 1 || std::fabs(stride * dt - p.sample_interval) > 1e-9 * p.sample_interval)
    throw std::invalid_argument("run_trajectory: sample_interval must be a whole number of time steps");

  const double t_start = s.t;
  s.jump_threshold = open_unit(rng);

  auto observe = [&](long step) {
    if (!observer) return;
    Field copy = s.field;
    normalize(copy);
    observer(static_cast<int>(step / stride), t_start + step * dt, copy);
  };

  observe(0);
  for (long step = 1; step <= total_steps; ++step) {
    const double previous = s.survival;
    split_step(s, prop);
    s.t = t_start + step * dt;
    if (s.survival > 1 + 1e-6) {
      std::ostringstream msg;
      msg << "run_trajectory: numerical blow-up, survival " << s.survival << " at t = " << s.t << " s";
      throw std::runtime_error(msg.str());
    }
    if (detect_jump(s)) {
      double t_jump = s.t;
      if (p.refine_jump_time && previous > s.survival) {
        // Exponential decay within the step: interpolate log survival.
        const double frac = std::log(previous / s.jump_threshold) / std::log(previous / s.survival);
        t_jump = s.t - dt + dt * std::clamp(frac, 0.0, 1.0);
      }
      apply_reset(s, sample_recoil(rng), t_jump, p, g, prop.potential(), rng);
    }
    if (step % stride == 0) observe(step);
  }

  TrajectoryRecord rec;
  rec.jump_log = std::move(s.jump_log);
  rec.final_field = std::move(s.field);
  normalize(rec.final_field);
  return rec;
}

}  // namespace ringdiode
