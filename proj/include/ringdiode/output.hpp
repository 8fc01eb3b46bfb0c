#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ringdiode/classical.hpp"
#include "ringdiode/diode.hpp"
#include "ringdiode/mcwf.hpp"
#include "ringdiode/observables.hpp"
#include "ringdiode/params.hpp"
#include "ringdiode/potentials.hpp"

namespace ringdiode {

/// Shortest decimal that round-trips; "nan" for NaN. Every CSV goes through
/// this, so equal doubles always print as equal bytes.
std::string format_number(double v);

/// Collects the files a command wrote, relative to its output directory.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  const std::vector<std::string>& files() const { return files_; }

  /// Opens `relative` for writing (creating parent directories), lets
  /// `write` fill it, and records it. Throws std::runtime_error on I/O errors.
  template <typename Fn>
  void write(const std::string& relative, Fn&& fill);

 private:
  std::ofstream open(const std::string& relative);
  void close(std::ofstream& out, const std::string& relative);

  std::filesystem::path root_;
  std::vector<std::string> files_;
};

void write_timeseries(std::ostream& out, const EnsembleAccumulator& acc);
void write_density_map(std::ostream& out, const std::vector<double>& times, double lo, double hi,
                       const std::vector<Eigen::ArrayXd>& maps, const char* coordinate);
void write_position_densities(std::ostream& out, const LevelDensities& d);
void write_velocity_densities(std::ostream& out, const LevelDensities& d);
void write_jump_log(std::ostream& out, const std::vector<JumpSample>& log);
void write_classical_trapping(std::ostream& out, const ClassicalEnsembleResult& r);
void write_classical_particles(std::ostream& out, const ClassicalEnsembleResult& r);
void write_potentials(std::ostream& out, const Grid& g, const PotentialProfiles& prof);
void write_scattering(std::ostream& out, const std::vector<ScatteringResult>& results);

/// Writes every quantum-ensemble output into `dir`.
void write_quantum_outputs(OutputDir& dir, const ParameterSet& p, const QuantumEnsembleResult& r);

/// Run manifest: resolved parameters (both as the config text that
/// reproduces them and as a key map), constants, code version, seed, timing
/// and the file inventory. `extra` is merged in at the top level.
nlohmann::json make_manifest(const std::string& command, const ParameterSet& p, double wall_clock_s,
                             const std::vector<std::string>& files, const nlohmann::json& extra = {});

/// Writes manifest.json, checking first that every listed file exists and is
/// non-empty.
void write_manifest(const OutputDir& dir, const nlohmann::json& manifest);

template <typename Fn>
void OutputDir::write(const std::string& relative, Fn&& fill) {
  std::ofstream out = open(relative);
  fill(static_cast<std::ostream&>(out));
  close(out, relative);
}

}  // namespace ringdiode
