#include "ringdiode/observables.hpp"

#include <cmath>
#include <mutex>
#include <optional>
#include <stdexcept>

#include "ringdiode/parallel.hpp"
#include "ringdiode/potentials.hpp"

namespace ringdiode {

double trapping_probability_x(const Field& f, const Grid& g, double x_min, double x_max) {
  return windowed_probability<double>(position_density(f, {0}), g, x_min, x_max);
}

double trapping_probability_v_momentum(const Field& momentum_field, const Grid& g, double v_T, double hbar_over_m) {
  const auto& c = momentum_field.level(0);
  double sum = 0;
  for (int j = 0; j < g.size(); ++j)
    if (std::fabs(hbar_over_m * g.k(j)) < v_T) sum += std::norm(c(j));
  return sum * momentum_field.dx();
}

double trapping_probability_v(const Field& f, const Grid& g, double v_T, double hbar_over_m) {
  return trapping_probability_v_momentum(to_momentum(f), g, v_T, hbar_over_m);
}

namespace {

// Momentum weights reordered to ascending mode index, as densities per m/s.
Eigen::ArrayXXd velocity_densities(const Field& momentum_field, const Grid& g, double dv) {
  const Eigen::ArrayXXd w = momentum_weights(momentum_field);
  const int n = g.size();
  Eigen::ArrayXXd q(n, w.cols());
  for (int i = 0; i < n; ++i) q.row(i) = w.row(g.slot(i - n / 2)) / dv;
  return q;
}

Eigen::ArrayXd sorted_velocities(const Grid& g, double hbar_over_m) {
  const int n = g.size();
  Eigen::ArrayXd v(n);
  for (int i = 0; i < n; ++i) v(i) = hbar_over_m * g.dk() * (i - n / 2);
  return v;
}

LevelDensities level_densities_from(const Field& f, const Field& momentum_field, const Grid& g,
                                    double hbar_over_m) {
  LevelDensities out;
  out.x = g.x();
  out.p = f.data().array().abs2();
  out.v = sorted_velocities(g, hbar_over_m);
  out.q = velocity_densities(momentum_field, g, hbar_over_m * g.dk());
  return out;
}

}  // namespace

DensityPair density_pair(const Field& f, const Grid& g, double hbar_over_m) {
  const LevelDensities d = level_densities(f, g, hbar_over_m);
  return {d.x, d.p.col(0) + d.p.col(1), d.v, d.q.col(0) + d.q.col(1)};
}

LevelDensities level_densities(const Field& f, const Grid& g, double hbar_over_m) {
  return level_densities_from(f, to_momentum(f), g, hbar_over_m);
}

Eigen::ArrayXd bin_density(const Eigen::ArrayXd& coords, const Eigen::ArrayXd& weights, double lo, double hi,
                           int bins) {
  if (bins < 1 || !(lo < hi)) throw std::invalid_argument("bin_density: need bins >= 1 and lo < hi");
  if (coords.size() != weights.size()) throw std::invalid_argument("bin_density: size mismatch");
  const double width = (hi - lo) / bins;
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(bins);
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    if (coords(i) < lo || coords(i) >= hi) continue;
    const int b = std::min(bins - 1, static_cast<int>((coords(i) - lo) / width));
    out(b) += weights(i);
  }
  return out / width;
}

SnapshotRecorder::SnapshotRecorder(const ParameterSet& p, const Grid& g, int samples)
    : p_(&p), g_(&g), samples_(samples), v_T_(derive_trap_velocity(p)) {
  obs_.P_Tx.assign(samples, 0.0);
  obs_.P_Tv.assign(samples, 0.0);
  obs_.x_map.resize(samples);
  obs_.v_map.resize(samples);
}

void SnapshotRecorder::operator()(int index, double, const Field& f) {
  if (index < 0 || index >= samples_) throw std::out_of_range("SnapshotRecorder: sample index out of range");
  const Grid& g = *g_;
  const double hm = p_->hbar_over_m();
  const Field mom = to_momentum(f);
  obs_.P_Tx[index] = trapping_probability_x(f, g, p_->x_min, p_->x_max);
  obs_.P_Tv[index] = trapping_probability_v_momentum(mom, g, v_T_, hm);

  const LevelDensities d = level_densities_from(f, mom, g, hm);
  const Eigen::ArrayXd px = d.p.col(0) + d.p.col(1);
  const Eigen::ArrayXd pv = d.q.col(0) + d.q.col(1);
  // Bin the enclosed probabilities, not the point densities.
  obs_.x_map[index] = bin_density(d.x, px * g.dx(), -g.length() / 2, g.length() / 2, p_->map_x_bins);
  obs_.v_map[index] =
      bin_density(d.v, pv * hm * g.dk(), -p_->map_v_max, p_->map_v_max, p_->map_v_bins);
  if (index == 0) obs_.initial = d;
  if (index == samples_ - 1) obs_.final = d;
}

EnsembleAccumulator::EnsembleAccumulator(std::vector<double> times, int x_bins, int v_bins)
    : times_(std::move(times)) {
  x_map_sum_.assign(times_.size(), Eigen::ArrayXd::Zero(x_bins));
  v_map_sum_.assign(times_.size(), Eigen::ArrayXd::Zero(v_bins));
}

void EnsembleAccumulator::add(const TrajectoryObservables& obs) {
  if (obs.P_Tx.size() != times_.size() || obs.x_map.size() != times_.size())
    throw std::invalid_argument("EnsembleAccumulator: trajectory has the wrong number of samples");
  P_Tx_.push_back(obs.P_Tx);
  P_Tv_.push_back(obs.P_Tv);
  for (std::size_t i = 0; i < times_.size(); ++i) {
    x_map_sum_[i] += obs.x_map[i];
    v_map_sum_[i] += obs.v_map[i];
  }
  auto accumulate = [this](LevelDensities& sum, const LevelDensities& d) {
    if (count_ == 0) {
      sum = d;
    } else {
      sum.p += d.p;
      sum.q += d.q;
    }
  };
  accumulate(initial_sum_, obs.initial);
  accumulate(final_sum_, obs.final);
  ++count_;
}

std::vector<double> EnsembleAccumulator::mean_of(const std::vector<std::vector<double>>& series, int n) {
  if (n < 1 || n > static_cast<int>(series.size()))
    throw std::invalid_argument("EnsembleAccumulator: mean over an invalid trajectory count");
  std::vector<double> out(series.front().size(), 0.0);
  for (int k = 0; k < n; ++k)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += series[k][i];
  for (double& v : out) v /= n;
  return out;
}

std::vector<double> EnsembleAccumulator::sem_of(const std::vector<std::vector<double>>& series) const {
  std::vector<double> out(times_.size(), 0.0);
  if (count_ < 2) return out;
  const std::vector<double> mean = mean_of(series, count_);
  for (int k = 0; k < count_; ++k)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += (series[k][i] - mean[i]) * (series[k][i] - mean[i]);
  for (double& v : out) v = std::sqrt(v / (count_ - 1) / count_);
  return out;
}

std::vector<Eigen::ArrayXd> EnsembleAccumulator::mean_x_map() const {
  std::vector<Eigen::ArrayXd> out = x_map_sum_;
  for (auto& a : out) a /= std::max(count_, 1);
  return out;
}

std::vector<Eigen::ArrayXd> EnsembleAccumulator::mean_v_map() const {
  std::vector<Eigen::ArrayXd> out = v_map_sum_;
  for (auto& a : out) a /= std::max(count_, 1);
  return out;
}

LevelDensities EnsembleAccumulator::mean_initial() const {
  LevelDensities d = initial_sum_;
  d.p /= std::max(count_, 1);
  d.q /= std::max(count_, 1);
  return d;
}

LevelDensities EnsembleAccumulator::mean_final() const {
  LevelDensities d = final_sum_;
  d.p /= std::max(count_, 1);
  d.q /= std::max(count_, 1);
  return d;
}

HalfSampleError half_sample_error(const EnsembleAccumulator& acc) {
  if (acc.count() < 2) throw std::invalid_argument("half_sample_error: needs at least 2 trajectories");
  const int half = acc.count() / 2;
  auto diff = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::fabs(a[i] - b[i]);
    return out;
  };
  return {diff(acc.mean_P_Tx(), acc.mean_P_Tx(half)), diff(acc.mean_P_Tv(), acc.mean_P_Tv(half))};
}

QuantumEnsembleResult run_quantum_ensemble(const ParameterSet& p, int workers,
                                           const std::function<void(int, int)>& progress) {
  if (!p.is_quantum()) throw std::invalid_argument("run_quantum_ensemble: needs a quantum mode");
  const Grid g(p.grid_points, p.ring_length);
  const PotentialTable pot = assemble_potential(p, g, p.mode);
  const Propagator prop(pot, g, p.hbar_over_m());
  const std::vector<double> times = sample_times(p);
  const int samples = static_cast<int>(times.size());
  const int count = p.n_trajectories;

  QuantumEnsembleResult result{EnsembleAccumulator(times, p.map_x_bins, p.map_v_bins), {}};
  result.jump_logs.resize(count);

  // Finished trajectories wait here until every lower index has been merged.
  std::vector<std::optional<TrajectoryObservables>> pending(count);
  int merged = 0;
  std::mutex merge_mutex;

  parallel_for(count, workers, [&](int i) {
    Rng rng = make_stream(p.rng_seed, static_cast<std::uint64_t>(i));
    SnapshotRecorder recorder(p, g, samples);
    TrajectoryRecord rec = run_trajectory(p, g, prop, rng, std::ref(recorder));
    TrajectoryObservables obs = recorder.take();
    obs.jump_log = std::move(rec.jump_log);

    std::lock_guard lock(merge_mutex);
    pending[i] = std::move(obs);
    while (merged < count && pending[merged]) {
      result.accumulator.add(*pending[merged]);
      result.jump_logs[merged] = std::move(pending[merged]->jump_log);
      pending[merged].reset();
      ++merged;
      if (progress) progress(merged, count);
    }
  });
  return result;
}

}  // namespace ringdiode
