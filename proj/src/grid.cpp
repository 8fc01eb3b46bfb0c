#include "ringdiode/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ringdiode/spectral.hpp"

namespace ringdiode {

Field build_initial_packet(const ParameterSet& p, const Grid& g) {
  const double hm = p.hbar_over_m();
  const double k0 = p.v0 / hm;
  const double dk = p.delta_v / hm;
  if (!(dk > 0)) throw std::invalid_argument("build_initial_packet: delta_v must be positive");

  // Continuous momentum weight falling outside [-k_max, k_max].
  const double k_max = g.k_max();
  const double leak = 0.5 * std::erfc((k_max - k0) / (std::sqrt(2.0) * dk)) +
                      0.5 * std::erfc((k_max + k0) / (std::sqrt(2.0) * dk));
  if (leak > 1e-8)
    throw std::runtime_error("build_initial_packet: packet leaks outside the momentum grid (tail weight " +
                             std::to_string(leak) + "); increase grid_points");

  const double shift = p.x0 - hm * p.t0 * k0;
  const double amp = std::pow(2 * M_PI, -0.25) / std::sqrt(dk);
  Field f(g.size(), p.levels(), g.dx());
  auto ground = f.level(0);
  for (int j = 0; j < g.size(); ++j) {
    const double k = g.k(j);
    const double q = k - k0;
    const double phase = -q * shift - 0.5 * hm * p.t0 * k * k;
    // (-1)^m from the grid origin at -l/2.
    const double sign = (g.mode_index(j) % 2 == 0) ? 1.0 : -1.0;
    ground(j) = sign * amp * std::exp(-q * q / (4 * dk * dk)) * std::polar(1.0, phase);
  }
  SpectralTransform(g.size(), p.levels()).inverse_raw(f);
  normalize(f);
  return f;
}

double initial_position_spread(const ParameterSet& p) {
  const double hm = p.hbar_over_m();
  const double dk = p.delta_v / hm;
  const double focus = 1.0 / (2 * dk);
  const double spread = hm * dk * p.t0;
  return std::sqrt(focus * focus + spread * spread);
}

}  // namespace ringdiode
