#include "ringdiode/output.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ringdiode {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + root_.string() + ": " + ec.message());
}

std::ofstream OutputDir::open(const std::string& relative) {
  const auto path = root_ / relative;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void OutputDir::close(std::ofstream& out, const std::string& relative) {
  out.close();
  if (!out) throw std::runtime_error("failed writing " + (root_ / relative).string());
  files_.push_back(relative);
}

namespace {

void row(std::ostream& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out << ',';
    out << format_number(v);
    first = false;
  }
  out << '\n';
}

void level_table(std::ostream& out, const char* coord, const char* prefix, const Eigen::ArrayXd& c,
                 const Eigen::ArrayXXd& d) {
  out << coord;
  for (Eigen::Index l = 0; l < d.cols(); ++l) out << ',' << prefix << l + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    out << format_number(c(i));
    for (Eigen::Index l = 0; l < d.cols(); ++l) out << ',' << format_number(d(i, l));
    out << '\n';
  }
}

}  // namespace

void write_timeseries(std::ostream& out, const EnsembleAccumulator& acc) {
  const auto mx = acc.mean_P_Tx();
  const auto mv = acc.mean_P_Tv();
  std::vector<double> ex(mx.size(), NAN), ev(mv.size(), NAN);
  if (acc.count() >= 2) {
    const HalfSampleError e = half_sample_error(acc);
    ex = e.P_Tx;
    ev = e.P_Tv;
  }
  out << "t,P_Tx_mean,P_Tx_err,P_Tv_mean,P_Tv_err\n";
  for (std::size_t i = 0; i < acc.times().size(); ++i) row(out, {acc.times()[i], mx[i], ex[i], mv[i], ev[i]});
}

void write_density_map(std::ostream& out, const std::vector<double>& times, double lo, double hi,
                       const std::vector<Eigen::ArrayXd>& maps, const char* coordinate) {
  out << "t," << coordinate << ",p\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Eigen::ArrayXd& m = maps[i];
    const double width = (hi - lo) / m.size();
    for (Eigen::Index b = 0; b < m.size(); ++b) row(out, {times[i], lo + (b + 0.5) * width, m(b)});
  }
}

void write_position_densities(std::ostream& out, const LevelDensities& d) { level_table(out, "x", "p", d.x, d.p); }

void write_velocity_densities(std::ostream& out, const LevelDensities& d) { level_table(out, "v", "q", d.v, d.q); }

void write_jump_log(std::ostream& out, const std::vector<JumpSample>& log) {
  out << "t_jump,u\n";
  for (const auto& j : log) row(out, {j.t_jump, j.u});
}

void write_classical_trapping(std::ostream& out, const ClassicalEnsembleResult& r) {
  out << "t,P_trap\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) row(out, {r.times[i], r.trapping_probability[i]});
}

void write_classical_particles(std::ostream& out, const ClassicalEnsembleResult& r) {
  out << "x_initial,v_initial,crossings,trap_time\n";
  for (const auto& pr : r.particles)
    row(out, {pr.x_initial, pr.v_initial, static_cast<double>(pr.final.crossings),
              pr.final.trapped ? pr.final.trap_time : NAN});
}

void write_potentials(std::ostream& out, const Grid& g, const PotentialProfiles& prof) {
  out << "x,W1,W2,W_T,W_Q,Omega_P\n";
  for (int j = 0; j < g.size(); ++j)
    row(out, {g.x(j), prof.W1(j), prof.W2(j), prof.W_T(j), prof.W_Q(j), prof.omega_P(j)});
}

void write_scattering(std::ostream& out, const std::vector<ScatteringResult>& results) {
  out << "v,direction,transmission,reflection,loss,transmission_excited,residual\n";
  for (const auto& r : results) {
    out << format_number(r.v) << ',' << to_string(r.direction) << ',';
    row(out, {r.transmission, r.reflection, r.loss, r.transmission_excited, r.residual});
  }
}

void write_quantum_outputs(OutputDir& dir, const ParameterSet& p, const QuantumEnsembleResult& r) {
  const EnsembleAccumulator& acc = r.accumulator;
  const double half = p.ring_length / 2;
  dir.write("timeseries.csv", [&](std::ostream& o) { write_timeseries(o, acc); });
  dir.write("density_map_x.csv",
            [&](std::ostream& o) { write_density_map(o, acc.times(), -half, half, acc.mean_x_map(), "x"); });
  dir.write("density_map_v.csv", [&](std::ostream& o) {
    write_density_map(o, acc.times(), -p.map_v_max, p.map_v_max, acc.mean_v_map(), "v");
  });
  const LevelDensities initial = acc.mean_initial();
  const LevelDensities final = acc.mean_final();
  dir.write("density_initial_x.csv", [&](std::ostream& o) { write_position_densities(o, initial); });
  dir.write("density_initial_v.csv", [&](std::ostream& o) { write_velocity_densities(o, initial); });
  dir.write("density_final_x.csv", [&](std::ostream& o) { write_position_densities(o, final); });
  dir.write("density_final_v.csv", [&](std::ostream& o) { write_velocity_densities(o, final); });
  for (std::size_t i = 0; i < r.jump_logs.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "jumps/trajectory_%04zu.csv", i);
    dir.write(name, [&](std::ostream& o) { write_jump_log(o, r.jump_logs[i]); });
  }
}

nlohmann::json make_manifest(const std::string& command, const ParameterSet& p, double wall_clock_s,
                             const std::vector<std::string>& files, const nlohmann::json& extra) {
  nlohmann::json m;
  m["command"] = command;
  m["version"] = RINGDIODE_VERSION;
  m["mode"] = std::string(to_string(p.mode));
  m["seed"] = p.rng_seed;
  m["n_trajectories"] = p.n_trajectories;
  m["wall_clock_s"] = wall_clock_s;
  m["constants"] = {{"hbar", PhysicalConstants::hbar},
                    {"atomic_mass_unit", PhysicalConstants::atomic_mass_unit},
                    {"neon_mass_u", kNeonMassU}};
  const std::string config = render_config(p);
  m["config"] = config;
  nlohmann::json params = nlohmann::json::object();
  std::istringstream lines(config);
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) params[line.substr(0, eq)] = line.substr(eq + 3);
  }
  m["parameters"] = params;
  // Only the ratio Omega_Q^2 / gamma3 is fixed by the physics; the split is a choice.
  m["gamma3_is_default"] = p.gamma3 == ParameterSet{}.gamma3 && p.omega_Q_hat == ParameterSet{}.omega_Q_hat;
  m["files"] = files;
  for (auto it = extra.begin(); extra.is_object() && it != extra.end(); ++it) m[it.key()] = it.value();
  return m;
}

void write_manifest(const OutputDir& dir, const nlohmann::json& manifest) {
  for (const auto& f : manifest.at("files")) {
    const auto path = dir.root() / f.get<std::string>();
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec) || std::filesystem::file_size(path, ec) == 0)
      throw std::runtime_error("output file missing or empty: " + path.string());
  }
  std::ofstream out(dir.root() / "manifest.json", std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << '\n';
  out.close();
  if (!out) throw std::runtime_error("failed writing " + (dir.root() / "manifest.json").string());
}

}  // namespace ringdiode
