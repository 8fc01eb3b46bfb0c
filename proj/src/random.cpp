#include "ringdiode/random.hpp"

namespace ringdiode {

Rng make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  return Rng(seq);
}

double sample_recoil(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double u = 2.0 * unit(rng) - 1.0;
    if (unit(rng) < 0.5 * (1.0 + u * u)) return u;
  }
}

double open_unit(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double r = 0.0;
  while (r == 0.0) r = unit(rng);
  return r;
}

}  // namespace ringdiode
