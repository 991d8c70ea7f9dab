#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "smr/rng.hpp"
#include "smr/sde.hpp"

namespace smr {

struct EnsembleOptions {
  double h0 = 0.0;
  double T = 1.0;
  double dt = 1e-2;
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::euler_maruyama;
  /// Number of stored time slices (including t = 0 and t = T).
  std::size_t series_points = 101;
  /// When set, the first time |h| leaves [lo, hi] is recorded per path.
  std::optional<std::pair<double, double>> exit_region;
  /// Paths crossing |h| > divergence_guard are excluded and counted.
  double divergence_guard = 1e6;
  /// 0 = off; otherwise store the sampled series of every stride-th path.
  std::size_t store_paths_stride = 0;
  /// Histogram bin-count override (0 = Freedman-Diaconis default).
  std::size_t histogram_bins = 0;
};

struct Histogram {
  std::vector<double> edges;          // bins + 1 entries
  std::vector<std::size_t> counts;    // sums to the number of completed paths
};

struct StoredPath {
  std::size_t path_index = 0;
  std::vector<double> states;         // one value per time slice
};

struct EnsembleStats {
  std::size_t n_paths = 0;            // requested
  std::size_t n_diverged = 0;         // excluded from all statistics
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> variance;
  /// Per-slice {5, 25, 50, 75, 95} percentiles of completed paths.
  std::vector<std::array<double, 5>> quantiles;
  std::vector<double> final_states;   // completed paths, path order
  double final_skewness = 0.0;
  Histogram final_histogram;
  std::vector<double> exit_times;     // escaped paths only, path order
  std::size_t exit_censored = 0;
  std::vector<StoredPath> stored_paths;
  double horizon = 0.0;

  std::size_t n_completed() const { return n_paths - n_diverged; }
};

inline constexpr std::array<double, 5> kQuantileLevels{0.05, 0.25, 0.5, 0.75, 0.95};

namespace detail {

inline double quantile_sorted(std::vector<double>& scratch, double level) {
  if (scratch.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(
      std::llround(level * static_cast<double>(scratch.size() - 1)));
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(idx),
                   scratch.end());
  return scratch[idx];
}

inline double skewness_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(xs.size());
  m3 /= static_cast<double>(xs.size());
  return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

inline Histogram build_histogram(const std::vector<double>& xs, std::size_t bins_override) {
  Histogram h;
  if (xs.empty()) return h;
  std::vector<double> sorted(xs);
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();
  std::size_t bins = bins_override;
  if (bins == 0) {
    const double q25 = sorted[(sorted.size() - 1) / 4];
    const double q75 = sorted[(3 * (sorted.size() - 1)) / 4];
    const double iqr = q75 - q25;
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
    bins = (width > 0.0 && hi > lo)
               ? static_cast<std::size_t>(std::ceil((hi - lo) / width))
               : 1;
    bins = std::clamp<std::size_t>(bins, 1, 10000);
  }
  double left = lo, right = hi;
  if (!(right > left)) {
    left -= 0.5;
    right += 0.5;
  }
  const double width = (right - left) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = left + width * static_cast<double>(i);
  h.edges.back() = right;
  h.counts.assign(bins, 0);
  for (double x : xs) {
    auto idx = static_cast<std::size_t>((x - left) / width);
    if (idx >= bins) idx = bins - 1;
    ++h.counts[idx];
  }
  return h;
}

}  // namespace detail

/// Simulate n_paths independent trajectories of a scalar SDE with per-path
/// deterministic noise streams (stream id = path index) and online statistics.
/// Diverged paths are excluded from every statistic except already-recorded
/// exit times, and counted in n_diverged.
inline EnsembleStats run_ensemble(const ScalarSde& sde, const EnsembleOptions& opts) {
  if (!(opts.dt > 0.0)) throw ConfigError("run_ensemble: dt must be positive");
  if (!(opts.T >= opts.dt)) throw ConfigError("run_ensemble: T must be at least dt");
  if (opts.n_paths < 1) throw ConfigError("run_ensemble: need at least one path");
  if (opts.series_points < 2) throw ConfigError("run_ensemble: need at least 2 series points");
  if (!sde.drift || !sde.diffusion) throw ConfigError("run_ensemble: incomplete SDE");
  if (!scheme_matches(opts.scheme, sde.interpretation))
    throw ConfigError("run_ensemble: scheme does not match the SDE interpretation "
                      "(euler_maruyama needs ito, heun needs stratonovich)");
  if (opts.exit_region &&
      (opts.h0 < opts.exit_region->first || opts.h0 > opts.exit_region->second))
    throw ConfigError("run_ensemble: exit region must contain the initial condition");

  const auto n_steps = static_cast<std::size_t>(std::llround(opts.T / opts.dt));
  const std::size_t n_slices = std::min<std::size_t>(opts.series_points, n_steps + 1);

  std::vector<std::size_t> slice_step(n_slices);
  for (std::size_t i = 0; i < n_slices; ++i)
    slice_step[i] = static_cast<std::size_t>(std::llround(
        static_cast<double>(n_steps) * static_cast<double>(i) /
        static_cast<double>(n_slices - 1)));

  EnsembleStats stats;
  stats.n_paths = opts.n_paths;
  stats.horizon = opts.T;
  stats.times.resize(n_slices);
  for (std::size_t i = 0; i < n_slices; ++i)
    stats.times[i] = static_cast<double>(slice_step[i]) * opts.dt;

  std::vector<double> mean(n_slices, 0.0), m2(n_slices, 0.0);
  std::vector<std::vector<float>> slice_values(n_slices);
  for (auto& sv : slice_values) sv.reserve(opts.n_paths);
  stats.final_states.reserve(opts.n_paths);

  std::vector<double> path_slices(n_slices);
  std::size_t n_merged = 0;

  for (std::size_t p = 0; p < opts.n_paths; ++p) {
    NoiseStream stream(opts.seed, p);
    double h = opts.h0;
    bool diverged = false;
    bool exited = false;
    double exit_time = 0.0;
    path_slices[0] = h;
    std::size_t next_slice = 1;
    const double sqrt_dt = std::sqrt(opts.dt);

    for (std::size_t step = 1; step <= n_steps; ++step) {
      const double dB = sqrt_dt * stream.normal();
      try {
        h = sde_step(opts.scheme, sde, h, opts.dt, dB);
      } catch (const DivergenceError&) {
        diverged = true;
      }
      if (!diverged && std::abs(h) > opts.divergence_guard) diverged = true;
      if (diverged) break;
      const double t = static_cast<double>(step) * opts.dt;
      if (opts.exit_region && !exited &&
          (h < opts.exit_region->first || h > opts.exit_region->second)) {
        exited = true;
        exit_time = t;
      }
      while (next_slice < n_slices && slice_step[next_slice] == step)
        path_slices[next_slice++] = h;
    }

    if (exited) stats.exit_times.push_back(exit_time);
    if (diverged) {
      ++stats.n_diverged;
      continue;
    }
    if (opts.exit_region && !exited) ++stats.exit_censored;

    ++n_merged;
    for (std::size_t i = 0; i < n_slices; ++i) {
      const double d = path_slices[i] - mean[i];
      mean[i] += d / static_cast<double>(n_merged);
      m2[i] += d * (path_slices[i] - mean[i]);
      slice_values[i].push_back(static_cast<float>(path_slices[i]));
    }
    stats.final_states.push_back(path_slices[n_slices - 1]);
    if (opts.store_paths_stride > 0 && p % opts.store_paths_stride == 0)
      stats.stored_paths.push_back(
          {p, std::vector<double>(path_slices.begin(), path_slices.end())});
  }

  stats.mean = std::move(mean);
  stats.variance.resize(n_slices, 0.0);
  for (std::size_t i = 0; i < n_slices; ++i)
    stats.variance[i] = n_merged > 1 ? m2[i] / static_cast<double>(n_merged - 1) : 0.0;

  stats.quantiles.resize(n_slices);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < n_slices; ++i) {
    scratch.assign(slice_values[i].begin(), slice_values[i].end());
    for (std::size_t q = 0; q < kQuantileLevels.size(); ++q)
      stats.quantiles[i][q] = detail::quantile_sorted(scratch, kQuantileLevels[q]);
  }

  stats.final_skewness = detail::skewness_of(stats.final_states);
  stats.final_histogram = detail::build_histogram(stats.final_states, opts.histogram_bins);
  return stats;
}

/// Build ensemble statistics from externally simulated scalar series sampled
/// on a shared time axis. An empty inner vector marks a diverged (dropped)
/// path; every surviving path must supply one value per time slice.
inline EnsembleStats summarize_series(const std::vector<double>& times,
                                      const std::vector<std::vector<double>>& paths,
                                      std::size_t histogram_bins = 0,
                                      std::size_t store_paths_stride = 0) {
  if (times.size() < 2) throw ConfigError("summarize_series: need at least 2 time slices");
  const std::size_t n_slices = times.size();

  EnsembleStats stats;
  stats.n_paths = paths.size();
  stats.horizon = times.back();
  stats.times = times;

  std::vector<double> mean(n_slices, 0.0), m2(n_slices, 0.0);
  std::vector<std::vector<float>> slice_values(n_slices);
  std::size_t n_merged = 0;

  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& path = paths[p];
    if (path.empty()) {
      ++stats.n_diverged;
      continue;
    }
    if (path.size() != n_slices)
      throw ConfigError("summarize_series: path length does not match the time axis");
    ++n_merged;
    for (std::size_t i = 0; i < n_slices; ++i) {
      const double d = path[i] - mean[i];
      mean[i] += d / static_cast<double>(n_merged);
      m2[i] += d * (path[i] - mean[i]);
      slice_values[i].push_back(static_cast<float>(path[i]));
    }
    stats.final_states.push_back(path[n_slices - 1]);
    if (store_paths_stride > 0 && p % store_paths_stride == 0)
      stats.stored_paths.push_back({p, path});
  }

  stats.mean = std::move(mean);
  stats.variance.resize(n_slices, 0.0);
  for (std::size_t i = 0; i < n_slices; ++i)
    stats.variance[i] = n_merged > 1 ? m2[i] / static_cast<double>(n_merged - 1) : 0.0;

  stats.quantiles.resize(n_slices);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < n_slices; ++i) {
    scratch.assign(slice_values[i].begin(), slice_values[i].end());
    for (std::size_t q = 0; q < kQuantileLevels.size(); ++q)
      stats.quantiles[i][q] = detail::quantile_sorted(scratch, kQuantileLevels[q]);
  }

  stats.final_skewness = detail::skewness_of(stats.final_states);
  stats.final_histogram = detail::build_histogram(stats.final_states, histogram_bins);
  return stats;
}

struct ExitSummary {
  double mean = 0.0;            // escaped paths only; horizon if none escaped
  double median = 0.0;
  double censored_mean = 0.0;   // mean of min(exit time, horizon) over all paths
  std::size_t count_escaped = 0;
  std::size_t count_censored = 0;
  double horizon = 0.0;
};

/// First-exit summary with right censoring at the simulation horizon.
inline ExitSummary exit_time_stats(const EnsembleStats& stats) {
  ExitSummary s;
  s.horizon = stats.horizon;
  s.count_escaped = stats.exit_times.size();
  s.count_censored = stats.exit_censored;
  const std::size_t total = s.count_escaped + s.count_censored;
  if (total == 0) {
    s.mean = s.median = s.censored_mean = stats.horizon;
    return s;
  }
  double sum = 0.0;
  for (double t : stats.exit_times) sum += t;
  s.censored_mean = (sum + static_cast<double>(s.count_censored) * stats.horizon) /
                    static_cast<double>(total);
  if (s.count_escaped == 0) {
    s.mean = s.median = stats.horizon;
    return s;
  }
  s.mean = sum / static_cast<double>(s.count_escaped);
  std::vector<double> sorted(stats.exit_times);
  std::sort(sorted.begin(), sorted.end());
  s.median = sorted[(sorted.size() - 1) / 2];
  return s;
}

}  // namespace smr
