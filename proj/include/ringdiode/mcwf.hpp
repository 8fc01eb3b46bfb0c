#pragma once

#include <functional>
#include <vector>

#include "ringdiode/grid.hpp"
#include "ringdiode/params.hpp"
#include "ringdiode/potentials.hpp"
#include "ringdiode/random.hpp"
#include "ringdiode/spectral.hpp"

namespace ringdiode {

struct JumpSample {
  double t_jump = 0;
  double u = 0;
};

/// One quantum trajectory between and across jumps. `field` is evolved
/// unnormalized under the effective Hamiltonian, so its squared norm is the
/// survival probability since the last jump.
struct TrajectoryState {
  Field field;
  double t = 0;
  double survival = 1;
  double jump_threshold = 1;
  std::vector<JumpSample> jump_log;
};

/// Strang split-step propagator for a fixed potential table and time step:
///   P_half . F^-1 . exp(-i dt hbar k^2 / 2m) . F . P_half
/// Read-only after construction, so one instance can serve many trajectories
/// on different threads.
class Propagator {
 public:
  Propagator(const PotentialTable& pot, const Grid& g, double hbar_over_m);

  double dt() const { return dt_; }
  int levels() const { return pot_->levels; }
  const PotentialTable& potential() const { return *pot_; }
  const SpectralTransform& transform() const { return fft_; }

  /// Advances the field by dt; does not touch t or survival.
  void advance(Field& f) const;

 private:
  const PotentialTable* pot_;
  SpectralTransform fft_;
  Eigen::ArrayXcd kinetic_;  // exp(-i dt hbar k^2 / 2m) / n
  double dt_;
};

/// Advances the state by one step and refreshes its survival.
void split_step(TrajectoryState& s, const Propagator& prop);

/// True once the survival has decayed to the jump threshold.
inline bool detect_jump(const TrajectoryState& s) { return s.survival <= s.jump_threshold; }

/// Wavenumber of the recoil kick, m v_rec u / hbar, optionally rounded to the
/// nearest ring mode so the phase is periodic.
double recoil_wavenumber(double u, const ParameterSet& p, const Grid& g);

/// Quantum jump: level 1 <- exp(i kappa x) (-i sqrt(W_Q) psi_2) in the
/// two-level model, or exp(i kappa x) psi_3 in the three-level model; other
/// levels are zeroed and the field is renormalized. Logs the jump and draws a
/// fresh threshold from `rng`. Throws if the reset leaves nothing to
/// normalize.
void apply_reset(TrajectoryState& s, double u, double t_jump, const ParameterSet& p, const Grid& g,
                 const PotentialTable& pot, Rng& rng);

struct TrajectoryRecord {
  std::vector<JumpSample> jump_log;
  Field final_field;  ///< normalized
};

/// Called at each sample time with the sample index, the time and a
/// normalized copy of the field.
using TrajectoryObserver = std::function<void(int, double, const Field&)>;

/// Sample times k * p.sample_interval for k = 0 .. floor(t_final / interval).
std::vector<double> sample_times(const ParameterSet& p);

/// Runs one trajectory from the initial packet to p.t_final.
TrajectoryRecord run_trajectory(const ParameterSet& p, const Grid& g, const Propagator& prop, Rng& rng,
                                const TrajectoryObserver& observer = {});

/// Same, starting from an explicit state (used by the toy and scattering
/// setups). The state's survival must equal its squared norm.
TrajectoryRecord run_trajectory_from(TrajectoryState s, const ParameterSet& p, const Grid& g,
                                     const Propagator& prop, Rng& rng, const TrajectoryObserver& observer = {});

}  // namespace ringdiode
