#include "ringdiode/classical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ringdiode/grid.hpp"
#include "ringdiode/parallel.hpp"

namespace ringdiode {

namespace {

double wrap(double x, double l) {
  double y = std::fmod(x + l / 2, l);
  if (y < 0) y += l;
  // fmod can round up to exactly l.
  if (y >= l) y = 0;
  return y - l / 2;
}

// Distance travelled along the direction of motion from x to reach target.
double arrival_distance(double x, double target, double l, bool forward) {
  double d = std::fmod(forward ? target - x : x - target, l);
  if (d < 0) d += l;
  return d;
}

}  // namespace

ClassicalParticle sample_initial(const ParameterSet& p, Rng& rng) {
  ClassicalParticle pt;
  std::normal_distribution<double> std_normal(0.0, 1.0);
  const double dv = p.delta_v;
  pt.v = p.v0 + (dv > 0 ? dv * std_normal(rng) : 0.0);
  double x = p.x0;
  if (dv > 0) {
    if (p.correlated_sampling) {
      const double focus = p.hbar_over_m() / (2 * dv);  // 1 / (2 dk)
      x += (pt.v - p.v0) * p.t0 + focus * std_normal(rng);
    } else {
      x += initial_position_spread(p) * std_normal(rng);
    }
  }
  pt.x = wrap(x, p.ring_length);
  return pt;
}

bool cross_diode(ClassicalParticle& pt, const ParameterSet& p, Rng& rng) {
  ++pt.crossings;
  if (p.v_rec > 0) pt.v += sample_recoil(rng) * p.v_rec;
  const double speed = std::fabs(pt.v);
  if (speed < p.v_T) {
    pt.trapped = true;
    return true;
  }
  const double sign = pt.v < 0 ? -1.0 : 1.0;
  if (p.subtraction_rule == SubtractionRule::velocity)
    pt.v = sign * (speed - p.v_T);
  else
    pt.v = sign * std::sqrt(std::max(0.0, speed * speed - p.v_T * p.v_T));
  return false;
}

void evolve_particle(ClassicalParticle& pt, const ParameterSet& p, double t_final, Rng& rng) {
  const double l = p.ring_length;
  double t = 0;
  bool at_diode = false;
  while (!pt.trapped) {
    if (pt.v == 0) break;
    const bool clockwise = pt.v > 0;
    double d = arrival_distance(pt.x, p.x_D, l, clockwise);
    // Leaving the diode clockwise means a full lap before the next passage;
    // leaving it anticlockwise means hitting it again at once.
    if (at_diode) d = clockwise ? l : 0.0;
    const double t_arrive = t + d / std::fabs(pt.v);
    if (t_arrive > t_final) {
      pt.x = wrap(pt.x + pt.v * (t_final - t), l);
      return;
    }
    t = t_arrive;
    pt.x = p.x_D;
    at_diode = true;
    if (!clockwise) {
      pt.v = -pt.v;
      continue;
    }
    if (cross_diode(pt, p, rng)) pt.trap_time = t;
  }
}

int analytic_crossings(double v, double v_T) {
  if (!(v > 0) || !(v_T > 0)) throw std::invalid_argument("analytic_crossings: v and v_T must be positive");
  int n = 0;
  while (!(v - n * v_T < v_T)) ++n;
  return n;
}

std::pair<double, double> analytic_time_parts(double v, double x_start, const ParameterSet& p) {
  if (!(v > 0)) throw std::invalid_argument("analytic_total_time: v must be positive");
  const double t0 = arrival_distance(x_start, p.x_D, p.ring_length, true) / v;
  const int n = analytic_crossings(v, p.v_T);
  double tn = 0;
  for (int j = 1; j <= n; ++j) {
    const double vj = v - j * p.v_T;
    if (!(vj > 0)) throw std::domain_error("analytic_total_time: round velocity v - j v_T is not positive");
    tn += p.ring_length / vj;
  }
  return {t0, tn};
}

double analytic_total_time(double v, double x_start, const ParameterSet& p) {
  const auto [t0, tn] = analytic_time_parts(v, x_start, p);
  return t0 + tn;
}

ClassicalEnsembleResult run_classical_ensemble(const ParameterSet& p, int workers) {
  ClassicalEnsembleResult out;
  const int n = p.n_trajectories;
  out.particles.resize(n);
  parallel_for(n, workers, [&](int i) {
    Rng rng = make_stream(p.rng_seed, static_cast<std::uint64_t>(i));
    ClassicalParticle pt = sample_initial(p, rng);
    ParticleRecord rec;
    rec.x_initial = pt.x;
    rec.v_initial = pt.v;
    evolve_particle(pt, p, p.t_final, rng);
    rec.final = pt;
    out.particles[i] = rec;
  });

  std::vector<double> trap_times;
  for (const auto& r : out.particles)
    if (r.final.trapped) trap_times.push_back(r.final.trap_time);
  std::sort(trap_times.begin(), trap_times.end());

  const long steps = std::lround(std::floor(p.t_final / p.sample_interval + 1e-9));
  for (long k = 0; k <= steps; ++k) out.times.push_back(k * p.sample_interval);
  if (out.times.back() < p.t_final * (1 - 1e-12)) out.times.push_back(p.t_final);
  for (double t : out.times) {
    const auto count = std::upper_bound(trap_times.begin(), trap_times.end(), t) - trap_times.begin();
    out.trapping_probability.push_back(static_cast<double>(count) / n);
  }
  return out;
}

}  // namespace ringdiode
