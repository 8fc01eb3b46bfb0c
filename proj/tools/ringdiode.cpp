#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "ringdiode/classical.hpp"
#include "ringdiode/diode.hpp"
#include "ringdiode/observables.hpp"
#include "ringdiode/output.hpp"
#include "ringdiode/parallel.hpp"
#include "ringdiode/params.hpp"
#include "ringdiode/potentials.hpp"

using namespace ringdiode;

namespace {

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::string out = "out";
  int workers = 0;
  std::optional<std::uint64_t> seed;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "configuration file (key = value lines)")->required();
  cmd->add_option("--set", o.overrides, "override one key, key=value (repeatable)");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--workers", o.workers, "worker threads (default: RINGDIODE_WORKERS or all CPUs)");
  cmd->add_option("--seed", o.seed, "random seed, overrides rng_seed");
}

ParameterSet load(const CommonOptions& o) {
  std::ifstream in(o.config);
  if (!in) throw ConfigError("cannot read config file " + o.config);
  std::stringstream text;
  text << in.rdbuf();
  ParameterSet p = parse_config(text.str());
  for (const auto& s : o.overrides) apply_override(p, s);
  if (o.seed) apply_override(p, "rng_seed=" + std::to_string(*o.seed));
  return p;
}

int workers_of(const CommonOptions& o) { return o.workers > 0 ? o.workers : default_workers(); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void cmd_run(const CommonOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  const ParameterSet p = load(o);
  const int workers = workers_of(o);
  OutputDir dir(o.out);
  nlohmann::json extra;
  if (p.mode == Mode::classical) {
    const ClassicalEnsembleResult r = run_classical_ensemble(p, workers);
    dir.write("classical_trapping.csv", [&](std::ostream& s) { write_classical_trapping(s, r); });
    dir.write("classical_particles.csv", [&](std::ostream& s) { write_classical_particles(s, r); });
    extra["final_trapping_probability"] = r.trapping_probability.back();
  } else {
    const QuantumEnsembleResult r = run_quantum_ensemble(p, workers, [](int done, int total) {
      std::cerr << "trajectory " << done << "/" << total << " done\n";
    });
    write_quantum_outputs(dir, p, r);
    extra["final_P_Tx"] = r.accumulator.mean_P_Tx().back();
    extra["final_P_Tv"] = r.accumulator.mean_P_Tv().back();
    extra["trap_velocity"] = derive_trap_velocity(p);
  }
  extra["workers"] = workers;
  write_manifest(dir, make_manifest("run", p, seconds_since(start), dir.files(), extra));
}

void cmd_characterize(const CommonOptions& o, double v_min, double v_max, double v_step) {
  if (!(v_step > 0)) throw UsageError("--v-step must be positive");
  if (!(v_min <= v_max)) throw UsageError("--v-min must not exceed --v-max");
  const auto start = std::chrono::steady_clock::now();
  const ParameterSet p = load(o);
  std::set<double> speeds;
  const long count = std::lround(std::floor((v_max - v_min) / v_step + 1e-9));
  for (long i = 0; i <= count; ++i) {
    // Snap to the step lattice so +v and -v map to the same speed.
    const double v = std::round((v_min + i * v_step) / v_step * 1e6) / 1e6 * v_step;
    if (std::fabs(v) > 0) speeds.insert(std::fabs(v));
  }
  if (speeds.empty()) throw UsageError("sweep contains no nonzero velocity");
  const std::vector<double> list(speeds.begin(), speeds.end());
  const int workers = workers_of(o);
  const auto results = scattering_sweep(p, list, workers, [](const ScatteringResult& r, int done, int total) {
    std::cerr << "scatter " << done << "/" << total << ": v = " << r.v << " m/s " << to_string(r.direction)
              << " T = " << r.transmission << " R = " << r.reflection << '\n';
  });
  OutputDir dir(o.out);
  dir.write("scattering.csv", [&](std::ostream& s) { write_scattering(s, results); });
  nlohmann::json extra;
  extra["sweep"] = {{"v_min", v_min}, {"v_max", v_max}, {"v_step", v_step}};
  extra["threshold"] = 0.99;
  try {
    const auto [lo, hi] = working_range(results);
    extra["working_range"] = {lo, hi};
  } catch (const std::runtime_error& e) {
    extra["working_range"] = nullptr;
    std::cerr << "ringdiode: " << e.what() << '\n';
  }
  extra["workers"] = workers;
  write_manifest(dir, make_manifest("characterize", p, seconds_since(start), dir.files(), extra));
}

void cmd_dump_potentials(const CommonOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  const ParameterSet p = load(o);
  const Grid g(p.grid_points, p.ring_length);
  const PotentialProfiles prof = evaluate_profiles(p, g);
  OutputDir dir(o.out);
  dir.write("potentials.csv", [&](std::ostream& s) { write_potentials(s, g, prof); });
  write_manifest(dir, make_manifest("dump-potentials", p, seconds_since(start), dir.files()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atom diode on a ring: classical, quantum-trajectory and scattering simulations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RINGDIODE_VERSION);

  CommonOptions run_opts, char_opts, dump_opts;
  auto* run = app.add_subcommand("run", "run the ensemble selected by `mode`");
  add_common(run, run_opts);

  auto* characterize = app.add_subcommand("characterize", "scattering sweep and diode working range");
  add_common(characterize, char_opts);
  double v_min = -0.15, v_max = 0.15, v_step = 0.01;
  characterize->add_option("--v-min", v_min, "lowest signed velocity, m/s")->capture_default_str();
  characterize->add_option("--v-max", v_max, "highest signed velocity, m/s")->capture_default_str();
  characterize->add_option("--v-step", v_step, "velocity step, m/s")->capture_default_str();

  auto* dump = app.add_subcommand("dump-potentials", "write the laser profiles on the grid");
  add_common(dump, dump_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) cmd_run(run_opts);
    if (characterize->parsed()) cmd_characterize(char_opts, v_min, v_max, v_step);
    if (dump->parsed()) cmd_dump_potentials(dump_opts);
  } catch (const UsageError& e) {
    std::cerr << "ringdiode: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "ringdiode: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ringdiode: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
