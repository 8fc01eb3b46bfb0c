#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ringdiode/mcwf.hpp"

using namespace ringdiode;
using namespace std::complex_literals;

namespace {

// Small ring, slow narrow packet, every laser off unless a test turns it on.
ParameterSet toy() {
  ParameterSet p;
  p.grid_points = 512;
  p.x0 = 0;
  p.v0 = 0.002;
  p.delta_v = 0.001;
  p.t0 = 0;
  p.omega_P_hat = p.W1_hat = p.W2_hat = p.W_T_hat = p.W_Q_hat = p.omega_Q_hat = 0;
  p.t_final = 2e-5;
  p.sample_interval = 1e-5;
  return p;
}

// A quench rate that is flat over the ring to double precision.
ParameterSet flat_quench() {
  ParameterSet p = toy();
  p.W_Q_hat = 1e5;
  p.sigma_Q = 1e3;
  return p;
}

TrajectoryState excited_state(const ParameterSet& p, const Grid& g) {
  TrajectoryState s;
  s.field = build_initial_packet(p, g);
  s.field.level(1) = s.field.level(0);
  s.field.level(0).setZero();
  s.survival = squared_norm(s.field);
  return s;
}

}  // namespace

TEST_CASE("Hermitian split steps conserve the norm") {
  ParameterSet p = toy();
  p.omega_P_hat = 4e4;
  p.W1_hat = 4e6;
  p.x_P = 0;
  p.x_W1 = 5e-6;
  p.sigma = 2e-6;
  const Grid g(p.grid_points, p.ring_length);
  const PotentialTable pot = assemble_potential(p, g, Mode::two_level);
  const Propagator prop(pot, g, p.hbar_over_m());
  TrajectoryState s;
  s.field = build_initial_packet(p, g);
  double worst = 0;
  for (int i = 0; i < 2000; ++i) {
    const double before = squared_norm(s.field);
    split_step(s, prop);
    worst = std::max(worst, std::fabs(s.survival - before));
  }
  CHECK(worst < 1e-13);
  CHECK(s.t == doctest::Approx(2000 * p.dt));
  CHECK(level_weight(s.field, {1}) > 0);  // the pump did act
}

TEST_CASE("free evolution follows the spreading law") {
  ParameterSet p = toy();
  p.grid_points = 1024;
  const Grid g(p.grid_points, p.ring_length);
  const PotentialTable pot = assemble_potential(p, g, Mode::two_level);
  const Propagator prop(pot, g, p.hbar_over_m());
  TrajectoryState s;
  s.field = build_initial_packet(p, g);
  const int steps = 5000;
  for (int i = 0; i < steps; ++i) split_step(s, prop);
  const double t = steps * p.dt;
  const Eigen::ArrayXd rho = position_density(s.field, {0}) * g.dx();
  const double mean = (rho * g.x()).sum();
  const double var = (rho * (g.x() - mean).square()).sum();
  const double s0 = p.hbar_over_m() / (2 * p.delta_v);
  CHECK(mean == doctest::Approx(p.x0 + p.v0 * t).epsilon(1e-6));
  CHECK(var == doctest::Approx(s0 * s0 + p.delta_v * p.delta_v * t * t).epsilon(1e-6));
}

TEST_CASE("flat quench: survival is exactly exponential and one jump follows") {
  ParameterSet p = flat_quench();
  p.t_final = 1e-4;
  const Grid g(p.grid_points, p.ring_length);
  const PotentialTable pot = assemble_potential(p, g, Mode::two_level);
  const Propagator prop(pot, g, p.hbar_over_m());
  TrajectoryState s = excited_state(p, g);
  for (int i = 1; i <= 100; ++i) {
    split_step(s, prop);
    REQUIRE(s.survival == doctest::Approx(std::exp(-p.W_Q_hat * i * p.dt)).epsilon(1e-12));
  }

  Rng rng = make_stream(11, 0);
  const TrajectoryRecord rec = run_trajectory_from(excited_state(p, g), p, g, prop, rng);
  REQUIRE(rec.jump_log.size() == 1);
  // The threshold was the first draw of the stream.
  Rng replay = make_stream(11, 0);
  const double eps = open_unit(replay);
  const double t_exact = -std::log(eps) / p.W_Q_hat;
  CHECK(rec.jump_log[0].t_jump >= t_exact - 1e-12);
  CHECK(rec.jump_log[0].t_jump < t_exact + p.dt);
  CHECK(level_weight(rec.final_field, {0}) == doctest::Approx(1.0));

  p.refine_jump_time = true;
  Rng again = make_stream(11, 0);
  const TrajectoryRecord refined = run_trajectory_from(excited_state(p, g), p, g, prop, again);
  CHECK(refined.jump_log[0].t_jump == doctest::Approx(t_exact).epsilon(1e-9));
  CHECK(refined.jump_log[0].u == rec.jump_log[0].u);
}

TEST_CASE("two-level reset applies the quench amplitude and the recoil phase") {
  ParameterSet p = flat_quench();
  p.v_rec = 0.035;
  const Grid g(p.grid_points, p.ring_length);
  const PotentialTable pot = assemble_potential(p, g, Mode::two_level);
  TrajectoryState s = excited_state(p, g);
  const Field before = s.field;
  Rng rng = make_stream(1, 0);
  apply_reset(s, 0.5, 1e-6, p, g, pot, rng);
  CHECK(s.survival == 1.0);
  CHECK(squared_norm(s.field) == doctest::Approx(1.0));
  CHECK(level_weight(s.field, {1}) == 0.0);
  REQUIRE(s.jump_log.size() == 1);
  CHECK(s.jump_log[0].t_jump == 1e-6);
  CHECK(s.jump_log[0].u == 0.5);
  const double kappa = p.v_rec * 0.5 / p.hbar_over_m();
  // Flat W_Q: the new ground state is -i e^{i kappa x} psi_2, up to normalization.
  const int j = g.slot(0);
  const std::complex<double> expect = -1i * std::exp(1i * kappa * g.x(j)) * before.level(1)(j);
  CHECK(std::abs(s.field.level(0)(j) - expect / std::sqrt(squared_norm(before))) < 1e-12);
  CHECK(s.jump_threshold > 0);
  CHECK(s.jump_threshold < 1);

  TrajectoryState empty;
  empty.field = Field(g.size(), 2, g.dx());
  empty.field.level(0).setConstant(1.0);
  CHECK_THROWS_AS(apply_reset(empty, 0.0, 0.0, p, g, pot, rng), std::runtime_error);
}

TEST_CASE("three-level reset moves level 3 to level 1") {
  ParameterSet p = toy();
  p.mode = Mode::three_level;
  const Grid g(p.grid_points, p.ring_length);
  const PotentialTable pot = assemble_potential(p, g, Mode::three_level);
  TrajectoryState s;
  s.field = build_initial_packet(p, g);
  s.field.level(2) = 0.5 * s.field.level(0);
  s.field.level(1) = s.field.level(0);
  s.field.level(0).setZero();
  const Field before = s.field;
  Rng rng = make_stream(1, 0);
  apply_reset(s, -1.0, 0.0, p, g, pot, rng);
  CHECK(level_weight(s.field, {1, 2}) == 0.0);
  const double ratio = std::abs(s.field.level(0)(g.slot(0)) / before.level(2)(g.slot(0)));
  CHECK(ratio == doctest::Approx(1.0 / std::sqrt(level_weight(before, {2}))));
}

TEST_CASE("commensurate recoil rounds to a ring mode") {
  ParameterSet p;
  p.v_rec = 0.035;
  const Grid g(p.grid_points, p.ring_length);
  const double raw = recoil_wavenumber(0.3, p, g);
  CHECK(raw == doctest::Approx(0.035 * 0.3 / p.hbar_over_m()));
  p.commensurate_recoil = true;
  const double snapped = recoil_wavenumber(0.3, p, g);
  CHECK(std::fabs(snapped - raw) <= 0.5 * g.dk());
  CHECK(std::fabs(snapped / g.dk() - std::round(snapped / g.dk())) < 1e-9);
}

TEST_CASE("sample times and stride checks") {
  ParameterSet p = toy();
  const auto t = sample_times(p);
  REQUIRE(t.size() == 3);
  CHECK(t[2] == doctest::Approx(2e-5));

  const Grid g(p.grid_points, p.ring_length);
  const PotentialTable pot = assemble_potential(p, g, Mode::two_level);
  const Propagator prop(pot, g, p.hbar_over_m());
  p.sample_interval = 3e-7;
  Rng rng = make_stream(1, 0);
  CHECK_THROWS_AS(run_trajectory(p, g, prop, rng), std::invalid_argument);
  p.mode = Mode::classical;
  CHECK_THROWS_AS(run_trajectory(p, g, prop, rng), std::invalid_argument);
}

TEST_CASE("observer sees normalized snapshots at every sample") {
  ParameterSet p = flat_quench();
  const Grid g(p.grid_points, p.ring_length);
  const PotentialTable pot = assemble_potential(p, g, Mode::two_level);
  const Propagator prop(pot, g, p.hbar_over_m());
  std::vector<int> seen;
  Rng rng = make_stream(2, 0);
  run_trajectory(p, g, prop, rng, [&](int i, double t, const Field& f) {
    seen.push_back(i);
    CHECK(t == doctest::Approx(i * p.sample_interval));
    CHECK(squared_norm(f) == doctest::Approx(1.0));
  });
  CHECK(seen == std::vector<int>{0, 1, 2});
}
