#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "ringdiode/grid.hpp"
#include "ringdiode/mcwf.hpp"
#include "ringdiode/params.hpp"
#include "ringdiode/spectral.hpp"

namespace ringdiode {

/// Ground-state population inside [x_min, x_max).
double trapping_probability_x(const Field& f, const Grid& g, double x_min, double x_max);

/// Ground-state population in the modes with |hbar k / m| < v_T (strict), from
/// a field already in momentum representation.
double trapping_probability_v_momentum(const Field& momentum_field, const Grid& g, double v_T, double hbar_over_m);

/// Same from a position-space field.
double trapping_probability_v(const Field& f, const Grid& g, double v_T, double hbar_over_m);

/// Levels 1 + 2 densities in both representations. px is per metre on the
/// grid points; pv is per (m/s) on the mode velocities, sorted ascending.
struct DensityPair {
  Eigen::ArrayXd x, px;
  Eigen::ArrayXd v, pv;
};

DensityPair density_pair(const Field& f, const Grid& g, double hbar_over_m);

/// Per-level densities for the snapshot CSVs: x with p1, p2[, p3] and
/// v with q1, q2[, q3], same units as DensityPair.
struct LevelDensities {
  Eigen::ArrayXd x;
  Eigen::ArrayXXd p;  ///< n x levels
  Eigen::ArrayXd v;
  Eigen::ArrayXXd q;  ///< n x levels
};

LevelDensities level_densities(const Field& f, const Grid& g, double hbar_over_m);

/// Histogram of a density onto `bins` equal bins over [lo, hi): each bin holds
/// the enclosed weight divided by the bin width. Points outside are dropped.
Eigen::ArrayXd bin_density(const Eigen::ArrayXd& coords, const Eigen::ArrayXd& weights, double lo, double hi,
                           int bins);

/// Observables recorded for one trajectory at every sample time.
struct TrajectoryObservables {
  std::vector<double> P_Tx, P_Tv;
  std::vector<Eigen::ArrayXd> x_map, v_map;  ///< binned p(x), p(v)
  LevelDensities initial, final;
  std::vector<JumpSample> jump_log;
};

/// Evaluates the per-snapshot observables for one trajectory.
class SnapshotRecorder {
 public:
  SnapshotRecorder(const ParameterSet& p, const Grid& g, int samples);
  void operator()(int index, double t, const Field& normalized);
  TrajectoryObservables take() { return std::move(obs_); }

 private:
  const ParameterSet* p_;
  const Grid* g_;
  int samples_;
  double v_T_;
  TrajectoryObservables obs_;
};

/// Trajectory-averaged observables. Trajectories must be added in index
/// order; the per-trajectory scalar series are kept so the half-sample error
/// can be formed for any count.
class EnsembleAccumulator {
 public:
  EnsembleAccumulator(std::vector<double> times, int x_bins, int v_bins);

  void add(const TrajectoryObservables& obs);

  int count() const { return count_; }
  const std::vector<double>& times() const { return times_; }

  std::vector<double> mean_P_Tx() const { return mean_of(P_Tx_, count_); }
  std::vector<double> mean_P_Tv() const { return mean_of(P_Tv_, count_); }
  /// Means over the first `n` trajectories only.
  std::vector<double> mean_P_Tx(int n) const { return mean_of(P_Tx_, n); }
  std::vector<double> mean_P_Tv(int n) const { return mean_of(P_Tv_, n); }
  /// Standard error of the mean; a diagnostic alongside the half-sample error.
  std::vector<double> sem_P_Tx() const { return sem_of(P_Tx_); }
  std::vector<double> sem_P_Tv() const { return sem_of(P_Tv_); }

  /// Per-trajectory series, trajectory-major.
  const std::vector<std::vector<double>>& trajectories_P_Tx() const { return P_Tx_; }
  const std::vector<std::vector<double>>& trajectories_P_Tv() const { return P_Tv_; }

  std::vector<Eigen::ArrayXd> mean_x_map() const;
  std::vector<Eigen::ArrayXd> mean_v_map() const;
  LevelDensities mean_initial() const;
  LevelDensities mean_final() const;

 private:
  static std::vector<double> mean_of(const std::vector<std::vector<double>>& series, int n);
  std::vector<double> sem_of(const std::vector<std::vector<double>>& series) const;

  std::vector<double> times_;
  int count_ = 0;
  std::vector<std::vector<double>> P_Tx_, P_Tv_;
  std::vector<Eigen::ArrayXd> x_map_sum_, v_map_sum_;
  LevelDensities initial_sum_, final_sum_;
};

struct HalfSampleError {
  std::vector<double> P_Tx, P_Tv;
};

/// |mean over N - mean over the first floor(N/2)| per sample time. Needs N >= 2.
HalfSampleError half_sample_error(const EnsembleAccumulator& acc);

struct QuantumEnsembleResult {
  EnsembleAccumulator accumulator;
  std::vector<std::vector<JumpSample>> jump_logs;
};

/// Runs p.n_trajectories trajectories on `workers` threads. Trajectory i uses
/// the stream make_stream(p.rng_seed, i); results are reduced in index order,
/// so the output does not depend on the worker count. `progress` (optional)
/// is called after each trajectory is merged.
QuantumEnsembleResult run_quantum_ensemble(const ParameterSet& p, int workers,
                                           const std::function<void(int, int)>& progress = {});

}  // namespace ringdiode
