#pragma once

#include <utility>
#include <vector>

#include "ringdiode/params.hpp"
#include "ringdiode/random.hpp"

namespace ringdiode {

struct ClassicalParticle {
  double x = 0;  ///< position in [-l/2, l/2)
  double v = 0;
  bool trapped = false;
  double trap_time = 0;  ///< valid only when trapped
  int crossings = 0;     ///< clockwise passages of x_D, including the trapping one

  /// Passages survived before being caught; matches analytic_crossings().
  int escapes() const { return trapped ? crossings - 1 : crossings; }
};

struct ParticleRecord {
  double x_initial = 0;
  double v_initial = 0;
  ClassicalParticle final;
};

struct ClassicalEnsembleResult {
  std::vector<double> times;
  std::vector<double> trapping_probability;
  std::vector<ParticleRecord> particles;
};

/// Initial position and velocity from the Gaussians matching |Psi0(x)|^2 and
/// |Phi0(k)|^2; independent unless p.correlated_sampling is set, in which case
/// x carries the position-velocity correlation of the quantum packet.
ClassicalParticle sample_initial(const ParameterSet& p, Rng& rng);

/// What happens at one clockwise passage of the point diode/trap: recoil
/// kick, then the trap test, then the escape cost. Returns true if trapped.
bool cross_diode(ClassicalParticle& pt, const ParameterSet& p, Rng& rng);

/// Exact event-driven flight until trapped or t_final. Anticlockwise arrivals
/// at x_D reflect elastically.
void evolve_particle(ClassicalParticle& pt, const ParameterSet& p, double t_final, Rng& rng);

/// Smallest n >= 0 with v - n v_T < v_T.
int analytic_crossings(double v, double v_T);

/// Closed-form trap time t_0 + t_n for a recoil-free particle starting at
/// x_start with velocity v > 0: first arrival at x_D plus n rounds at
/// v - j v_T. Throws std::domain_error if a round velocity is non-positive.
double analytic_total_time(double v, double x_start, const ParameterSet& p);

/// Same closed form split into (t_0, t_n).
std::pair<double, double> analytic_time_parts(double v, double x_start, const ParameterSet& p);

/// Runs p.n_trajectories particles (deterministic per p.rng_seed) on
/// `workers` threads and samples the trapped fraction every p.sample_interval
/// up to p.t_final.
ClassicalEnsembleResult run_classical_ensemble(const ParameterSet& p, int workers = 1);

}  // namespace ringdiode
