#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ringdiode {

/// CODATA 2018 values, fixed at build time and echoed into every run manifest.
struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;             // J s
  static constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
};

/// Standard atomic weight of neon, in atomic mass units.
inline constexpr double kNeonMassU = 20.1797;

enum class Mode { two_level, three_level, classical };

/// How a classical particle pays for escaping the point trap.
enum class SubtractionRule {
  velocity,  ///< |v| -> |v| - v_T
  energy,    ///< v^2 -> v^2 - v_T^2
};

/// How the 3x3 potential half-step exponential treats the level-3 absorber.
enum class AbsorberSplitting {
  strang,  ///< exp(A/2) exp(H) exp(A/2) with H the Hermitian part
  exact,   ///< full non-Hermitian matrix exponential
};

std::string_view to_string(Mode m);
std::string_view to_string(SubtractionRule r);
std::string_view to_string(AbsorberSplitting s);

/// Thrown for any configuration problem; the message names the key and value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every physical and numerical input of a run, in SI units. Rates are in
/// 1/s and enter the Hamiltonian multiplied by hbar/2.
struct ParameterSet {
  Mode mode = Mode::two_level;

  double ring_length = 400e-6;
  double mass = kNeonMassU * PhysicalConstants::atomic_mass_unit;

  // Laser profiles: peaks (1/s), Gaussian centres and widths (m).
  double omega_P_hat = 4e4;
  double W1_hat = 4e6;
  double W2_hat = 4e6;
  double W_T_hat = -1e5;
  double W_Q_hat = 1e5;
  double x_W2 = -90e-6;
  double x_P = -40e-6;
  double x_W1 = 10e-6;
  double x_T = 80e-6;
  double x_Q = 100e-6;
  double sigma = 15e-6;
  double sigma_T = 30e-6;
  double sigma_Q = 10e-6 / 1.4142135623730951;  // width of W_Q

  double v_rec = 0.0;
  double gamma3 = 1e7;
  double omega_Q_hat = 1e6;

  // Initial packet.
  double x0 = -200e-6;
  double v0 = 0.05;
  double delta_v = 0.04;
  double t0 = 1e-3;

  // Classical toy model.
  double x_D = 80e-6;
  double v_T = 0.018;
  SubtractionRule subtraction_rule = SubtractionRule::velocity;
  bool correlated_sampling = false;

  // Numerics.
  int grid_points = 16384;
  double dt = 2e-7;
  double t_final = 0.4;
  double sample_interval = 1e-3;
  int n_trajectories = 200;
  std::uint64_t rng_seed = 20080101;
  AbsorberSplitting absorber_splitting = AbsorberSplitting::strang;
  bool refine_jump_time = false;
  bool commensurate_recoil = false;

  // Trap window for P_{T,x}.
  double x_min = 10e-6;
  double x_max = 200e-6;

  // Binning of the (t, x) and (t, v) density maps.
  int map_x_bins = 400;
  int map_v_bins = 300;
  double map_v_max = 0.3;

  bool is_quantum() const { return mode != Mode::classical; }
  int levels() const { return mode == Mode::three_level ? 3 : 2; }
  double hbar_over_m() const { return PhysicalConstants::hbar / mass; }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

/// Parses a flat `key = value` document (`#` starts a comment). Keys not
/// present keep their defaults; `mode` is mandatory. The result is validated.
ParameterSet parse_config(std::string_view text);

/// Applies one `key=value` override on top of an existing set, then
/// revalidates.
void apply_override(ParameterSet& p, std::string_view assignment);

/// Renders every key with round-trip precision; parse_config(render_config(p))
/// reproduces p exactly.
std::string render_config(const ParameterSet& p);

/// Throws ConfigError on the first violated invariant.
void validate(const ParameterSet& p);

/// Velocity whose kinetic energy equals the trap depth, sqrt(hbar |W_T| / m).
double derive_trap_velocity(const ParameterSet& p);

/// Peak quench rate of the effective two-level model, Omega_Q^2 / gamma3.
double derive_quench_peak(double omega_Q_hat, double gamma3);

/// Squaring a Gaussian of width s gives one of width s / sqrt(2); this maps a
/// Rabi-frequency width to the quench-rate width.
double quench_width_from_rabi_width(double rabi_width);
double rabi_width_from_quench_width(double quench_width);

/// Largest speed hbar k_max / m representable on the configured grid.
double max_grid_velocity(const ParameterSet& p);

}  // namespace ringdiode
