#pragma once

#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "ringdiode/grid.hpp"
#include "ringdiode/params.hpp"

namespace ringdiode {

enum class Direction { left_to_right, right_to_left };

std::string_view to_string(Direction d);

/// Asymptotic outcome of one scattering run. `transmission_excited` is the
/// part of `transmission` carried by level 2, i.e. atoms the diode actually
/// pumped on the way through.
struct ScatteringResult {
  double v = 0;  ///< incident speed, m/s (positive)
  Direction direction = Direction::left_to_right;
  double transmission = 0;
  double reflection = 0;
  double loss = 0;
  double transmission_excited = 0;
  double residual = 0;  ///< weight still in the region when the run stopped
};

/// Geometry and packet of a scattering run, exposed for inspection.
struct ScatteringSetup {
  ParameterSet params;  ///< trap and quench lasers off, doubled ring at the same dx
  double region_lo = 0, region_hi = 0;  ///< where any remaining laser is non-negligible
  double x_start = 0;
  double focus_time = 0;  ///< when the packet is narrowest, at the region centre
  double time_budget = 0;
};

/// Packet velocity spread used at incident speed v: min(0.5 cm/s, 0.05 |v|).
double scattering_velocity_spread(double v);

ScatteringSetup scattering_setup(const ParameterSet& p, double v, Direction d);

/// Sends a narrow ground-state packet at speed v through the diode region.
/// From the focus time on, weight leaving the region is split off through a
/// smooth mask and classified by the sign of its momentum, so nothing wraps
/// around the ring back into the lasers. Stops once less than 1e-5 is left
/// or at the time budget. Weight still held by a long-lived resonance at the
/// budget is split between transmission and reflection in the ratio of the
/// outgoing flux over the last quarter of the run, and reported as
/// `residual`. `loss` is absorbed weight.
ScatteringResult scatter(const ParameterSet& p, double v, Direction d);

/// Runs both directions at every speed in `speeds` (positive, m/s) on
/// `workers` threads; results ordered by speed, then direction.
/// `progress(result, done, total)` runs after each run, serialized.
std::vector<ScatteringResult> scattering_sweep(
    const ParameterSet& p, const std::vector<double>& speeds, int workers,
    const std::function<void(const ScatteringResult&, int, int)>& progress = {});

/// Whether the diode works at signed velocity v: for v > 0 the left_to_right
/// run must transmit >= threshold in the excited level, for v < 0 the
/// right_to_left run must reflect >= threshold.
bool diode_qualifies(const ScatteringResult& r, double threshold = 0.99);

/// Largest contiguous run of qualifying points on the signed velocity axis
/// (+v for left_to_right results, -v for right_to_left), as (lowest, highest).
/// Throws std::invalid_argument on empty input, std::runtime_error if no
/// point qualifies.
std::pair<double, double> working_range(const std::vector<ScatteringResult>& results, double threshold = 0.99);

}  // namespace ringdiode
