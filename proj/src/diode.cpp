#include "ringdiode/diode.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "ringdiode/mcwf.hpp"
#include "ringdiode/parallel.hpp"
#include "ringdiode/potentials.hpp"
#include "ringdiode/spectral.hpp"

namespace ringdiode {

namespace {

constexpr double kRegionSigmas = 6;
constexpr double kClearWeight = 1e-5;
constexpr double kMargin = 10e-6;
constexpr double kBuffer = 10e-6;  // gap between the region and the splitting ramp
constexpr double kRamp = 30e-6;
constexpr long kCheckStride = 500;

}  // namespace

std::string_view to_string(Direction d) {
  return d == Direction::left_to_right ? "left_to_right" : "right_to_left";
}

double scattering_velocity_spread(double v) { return std::min(0.005, 0.05 * std::fabs(v)); }

ScatteringSetup scattering_setup(const ParameterSet& p, double v, Direction d) {
  if (!(v > 0)) throw std::invalid_argument("scatter: incident speed must be positive");
  ScatteringSetup s;
  ParameterSet& q = s.params;
  q = p;
  q.W_T_hat = 0;
  q.W_Q_hat = 0;
  q.omega_Q_hat = 0;
  q.ring_length = 2 * p.ring_length;
  q.grid_points = 2 * p.grid_points;

  double lo = INFINITY, hi = -INFINITY;
  auto include = [&](double amplitude, double centre) {
    if (amplitude == 0) return;
    lo = std::min(lo, centre - kRegionSigmas * p.sigma);
    hi = std::max(hi, centre + kRegionSigmas * p.sigma);
  };
  include(p.W1_hat, p.x_W1);
  include(p.W2_hat, p.x_W2);
  include(p.omega_P_hat, p.x_P);
  if (!(lo < hi)) {
    lo = p.x_P - kRegionSigmas * p.sigma;
    hi = p.x_P + kRegionSigmas * p.sigma;
  }
  s.region_lo = lo;
  s.region_hi = hi;

  // Start far enough out that the packet, spreading at delta_v, still has
  // six widths of clearance from the region edge.
  const double dv = scattering_velocity_spread(v);
  const double half = 0.5 * (hi - lo);
  const double distance = (half + kMargin) / (1 - kRegionSigmas * dv / v);
  const double centre = 0.5 * (lo + hi);
  const double reach = distance + kRegionSigmas * dv * distance / v;
  if (reach > q.ring_length / 2)
    throw std::runtime_error("scatter: interaction region too wide for the scattering domain");

  s.focus_time = distance / v;
  s.x_start = d == Direction::left_to_right ? centre - distance : centre + distance;
  s.time_budget = 4 * (2 * distance) / v;

  q.x0 = s.x_start;
  q.v0 = d == Direction::left_to_right ? v : -v;
  q.delta_v = dv;
  q.t0 = -s.focus_time;
  return s;
}

ScatteringResult scatter(const ParameterSet& p, double v, Direction d) {
  const ScatteringSetup s = scattering_setup(p, v, d);
  const ParameterSet& q = s.params;
  const Grid g(q.grid_points, q.ring_length);
  const PotentialTable pot = assemble_potential(q, g, q.mode);
  const Propagator prop(pot, g, q.hbar_over_m());
  Field f = build_initial_packet(q, g);

  // keep^2 + take^2 = 1: the split moves weight without creating any, and the
  // cos ramp is many wavelengths long so the cut neither reflects nor smears
  // momentum across zero.
  Eigen::ArrayXd keep(g.size()), take(g.size());
  for (int j = 0; j < g.size(); ++j) {
    const double outside = std::max(s.region_lo - kBuffer - g.x(j), g.x(j) - s.region_hi - kBuffer);
    const double c = outside <= 0 ? 1.0 : outside >= kRamp ? 0.0 : std::cos(0.5 * M_PI * outside / kRamp);
    keep(j) = c;
    take(j) = std::sqrt(std::max(0.0, 1 - c * c));
  }

  double forward = 0, backward = 0, forward_excited = 0;
  const double sign = d == Direction::left_to_right ? 1.0 : -1.0;
  auto split_off = [&] {
    Field out = f;
    for (int l = 0; l < f.levels(); ++l) {
      out.level(l).array() *= take;
      f.level(l).array() *= keep;
    }
    const Eigen::ArrayXXd w = momentum_weights(to_momentum(out));
    for (int j = 0; j < g.size(); ++j) {
      const double k = sign * g.k(j);
      const double total = w.row(j).sum();
      const double share = k > 0 ? 1.0 : k < 0 ? 0.0 : 0.5;
      forward += share * total;
      backward += (1 - share) * total;
      if (f.levels() > 1) forward_excited += share * w(j, 1);
    }
  };

  // Extraction starts at the focus time, when every incoming component is
  // already inside the region; what is outside from then on is outgoing.
  const long min_steps = std::lround(s.focus_time / q.dt);
  const long max_steps = std::lround(s.time_budget / q.dt);
  const long late = min_steps + 3 * (max_steps - min_steps) / 4;
  double forward_late = 0, backward_late = 0, excited_late = 0;
  bool late_marked = false;
  double remaining = 1;
  for (long step = 1; step <= max_steps; ++step) {
    prop.advance(f);
    if (step >= min_steps && (step - min_steps) % kCheckStride == 0) {
      split_off();
      remaining = squared_norm(f);
      if (remaining < kClearWeight) break;
      if (!late_marked && step >= late) {
        forward_late = forward;
        backward_late = backward;
        excited_late = forward_excited;
        late_marked = true;
      }
    }
  }
  split_off();
  remaining = squared_norm(f);

  ScatteringResult r;
  r.v = v;
  r.direction = d;
  r.residual = remaining;
  if (remaining >= kClearWeight && late_marked) {
    // A long-lived resonance is still draining; hand out what is left with
    // the branching it showed over the last quarter of the run.
    const double dT = forward - forward_late, dR = backward - backward_late, dE = forward_excited - excited_late;
    if (dT + dR > 0) {
      forward_excited += remaining * dE / (dT + dR);
      forward += remaining * dT / (dT + dR);
      backward += remaining * dR / (dT + dR);
      remaining = 0;
    }
  }
  r.transmission = forward;
  r.reflection = backward;
  r.transmission_excited = forward_excited;
  r.loss = 1 - forward - backward;
  return r;
}

std::vector<ScatteringResult> scattering_sweep(
    const ParameterSet& p, const std::vector<double>& speeds, int workers,
    const std::function<void(const ScatteringResult&, int, int)>& progress) {
  std::vector<ScatteringResult> out(2 * speeds.size());
  std::mutex m;
  int done = 0;
  parallel_for(static_cast<int>(out.size()), workers, [&](int i) {
    const Direction d = i % 2 == 0 ? Direction::left_to_right : Direction::right_to_left;
    out[i] = scatter(p, speeds[i / 2], d);
    std::lock_guard lock(m);
    ++done;
    if (progress) progress(out[i], done, static_cast<int>(out.size()));
  });
  return out;
}

bool diode_qualifies(const ScatteringResult& r, double threshold) {
  return r.direction == Direction::left_to_right ? r.transmission_excited >= threshold
                                                 : r.reflection >= threshold;
}

std::pair<double, double> working_range(const std::vector<ScatteringResult>& results, double threshold) {
  if (results.empty()) throw std::invalid_argument("working_range: no scattering results");
  std::vector<std::pair<double, bool>> axis;
  for (const auto& r : results)
    axis.emplace_back(r.direction == Direction::left_to_right ? r.v : -r.v, diode_qualifies(r, threshold));
  std::sort(axis.begin(), axis.end());

  std::size_t best_begin = 0, best_len = 0;
  double best_span = -1;
  for (std::size_t i = 0; i < axis.size();) {
    if (!axis[i].second) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < axis.size() && axis[j].second) ++j;
    const double span = axis[j - 1].first - axis[i].first;
    if (span > best_span) {
      best_begin = i;
      best_len = j - i;
      best_span = span;
    }
    i = j;
  }
  if (best_len == 0) throw std::runtime_error("working_range: no velocity qualifies");
  return {axis[best_begin].first, axis[best_begin + best_len - 1].first};
}

}  // namespace ringdiode
