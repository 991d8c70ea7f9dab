#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "smr/config.hpp"
#include "smr/ensemble.hpp"
#include "smr/errors.hpp"
#include "smr/io.hpp"
#include "smr/models.hpp"
#include "smr/modes.hpp"
#include "smr/noise.hpp"
#include "smr/reduction.hpp"
#include "smr/sde.hpp"
#include "smr/spde.hpp"

namespace smr {

enum class RunMode { reduced, full_spde, coupled, equivalence, covariance_test };

inline std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::reduced: return "reduced";
    case RunMode::full_spde: return "full-spde";
    case RunMode::coupled: return "coupled";
    case RunMode::equivalence: return "equivalence";
    default: return "covariance-test";
  }
}

inline RunMode parse_run_mode(const std::string& s) {
  if (s == "reduced") return RunMode::reduced;
  if (s == "full-spde") return RunMode::full_spde;
  if (s == "coupled") return RunMode::coupled;
  if (s == "equivalence") return RunMode::equivalence;
  if (s == "covariance-test") return RunMode::covariance_test;
  throw ConfigError("unknown mode '" + s +
                    "' (expected reduced, full-spde, coupled, equivalence, covariance-test)");
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "euler_maruyama" || s == "em") return Scheme::euler_maruyama;
  if (s == "heun") return Scheme::heun;
  throw ConfigError("unknown scheme '" + s + "' (expected euler_maruyama or heun)");
}

inline DiffusionKind parse_diffusion_kind(const std::string& s) {
  if (s == "channel") return DiffusionKind::channel_multiplicative;
  if (s == "pointwise") return DiffusionKind::pointwise_multiplicative;
  throw ConfigError("unknown diffusion '" + s + "' (expected channel or pointwise)");
}

/// Process exit codes: 0 success, 2 configuration, 3 divergence, 4 tube exit
/// or chart degeneracy, 5 verification failure, 1 anything else.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const VerificationError*>(&e)) return 5;
  if (dynamic_cast<const TubeExitError*>(&e)) return 4;
  if (dynamic_cast<const DegeneracyError*>(&e)) return 4;
  if (dynamic_cast<const DivergenceError*>(&e)) return 3;
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const InitializationError*>(&e)) return 2;
  if (dynamic_cast<const UnsupportedError*>(&e)) return 2;
  return 1;
}

struct RunResult {
  std::filesystem::path output_dir;
  std::string config_hash;
  nlohmann::json summary;
  std::vector<std::string> files;  // names written into output_dir
};

namespace detail {

/// Slice grid shared by every ensemble-style mode: n_slices indices spread
/// evenly over [0, n_steps], endpoints included.
inline std::vector<std::size_t> slice_steps(std::size_t n_steps, std::size_t series_points) {
  const std::size_t n_slices = std::min<std::size_t>(series_points, n_steps + 1);
  std::vector<std::size_t> steps(n_slices);
  for (std::size_t i = 0; i < n_slices; ++i)
    steps[i] = static_cast<std::size_t>(std::llround(static_cast<double>(n_steps) *
                                                     static_cast<double>(i) /
                                                     static_cast<double>(n_slices - 1)));
  return steps;
}

struct FieldPaths {
  std::vector<std::vector<double>> paths;  // empty inner vector = dropped path
  std::size_t n_diverged = 0;
  std::size_t n_tube_exits = 0;
  double max_ortho_residual = 0.0;  // coupled runs only
};

/// Direct Galerkin integration of the SPDE; the manifold coordinate is read
/// off at each slice by Fermi projection warm-started from the previous slice.
template <class Scalar>
FieldPaths simulate_full_paths(const ModelT<Scalar>& model, const EnsembleOptions& opts,
                               int n_modes, const std::vector<std::size_t>& slice_step,
                               std::size_t n_steps) {
  GalerkinStepper<Scalar> stepper(model.problem, n_modes);
  const auto& ws = stepper.workspace();
  FieldPaths out;
  out.paths.reserve(opts.n_paths);
  Params h0(1);
  h0[0] = opts.h0;
  const FieldT<Scalar> u0 = model.chart.eval(h0);

  for (std::size_t p = 0; p < opts.n_paths; ++p) {
    NoiseStream stream(opts.seed, p);
    auto state = stepper.init(u0);
    std::vector<double> path;
    path.reserve(slice_step.size());
    path.push_back(opts.h0);
    Params guess = h0;
    std::size_t next_slice = 1;
    bool ok = true;
    for (std::size_t step = 1; step <= n_steps && ok; ++step) {
      const auto inc = sample_increment(stepper.problem().noise, opts.dt, stream);
      try {
        state = stepper.step(state, opts.dt, inc);
      } catch (const DivergenceError&) {
        ok = false;
        ++out.n_diverged;
        break;
      }
      while (ok && next_slice < slice_step.size() && slice_step[next_slice] == step) {
        try {
          const auto pair = fermi_project(model.chart, ws.reconstruct(state.coefficients), guess);
          guess = pair.h;
          path.push_back(pair.h[0]);
          ++next_slice;
        } catch (const Error&) {  // projection lost the tube
          ok = false;
          ++out.n_tube_exits;
        }
      }
    }
    if (!ok) path.clear();
    out.paths.push_back(std::move(path));
  }
  return out;
}

/// Coupled (h, v) integration; the slow coordinate is carried explicitly, so
/// slices read state.h directly and track the orthogonality residual.
template <class Scalar>
FieldPaths simulate_coupled_paths(const ModelT<Scalar>& model, const EnsembleOptions& opts,
                                  int n_modes, const std::vector<std::size_t>& slice_step,
                                  std::size_t n_steps) {
  CoupledStepper<Scalar> stepper(model.problem, model.chart, n_modes);
  FieldPaths out;
  out.paths.reserve(opts.n_paths);
  Params h0(1);
  h0[0] = opts.h0;
  const FieldT<Scalar> v0 = FieldT<Scalar>::zero(model.grid);

  for (std::size_t p = 0; p < opts.n_paths; ++p) {
    NoiseStream stream(opts.seed, p);
    auto state = stepper.init(h0, v0);
    std::vector<double> path;
    path.reserve(slice_step.size());
    path.push_back(opts.h0);
    std::size_t next_slice = 1;
    bool ok = true;
    for (std::size_t step = 1; step <= n_steps && ok; ++step) {
      const auto inc = sample_increment(stepper.problem().noise, opts.dt, stream);
      try {
        state = stepper.step(state, opts.dt, inc);
      } catch (const TubeExitError&) {
        ok = false;
        ++out.n_tube_exits;
        break;
      } catch (const DegeneracyError&) {
        ok = false;
        ++out.n_tube_exits;
        break;
      } catch (const DivergenceError&) {
        ok = false;
        ++out.n_diverged;
        break;
      }
      while (next_slice < slice_step.size() && slice_step[next_slice] == step) {
        path.push_back(state.h[0]);
        out.max_ortho_residual =
            std::max(out.max_ortho_residual, stepper.ortho_residual_of(state));
        ++next_slice;
      }
    }
    if (!ok) path.clear();
    out.paths.push_back(std::move(path));
  }
  return out;
}

inline nlohmann::json stats_report(const EnsembleStats& stats) {
  nlohmann::json r;
  r["n_paths"] = stats.n_paths;
  r["n_completed"] = stats.n_completed();
  r["n_diverged"] = stats.n_diverged;
  r["final_mean"] = stats.mean.back();
  r["final_variance"] = stats.variance.back();
  r["final_skewness"] = stats.final_skewness;
  const auto& q = stats.quantiles.back();
  r["final_quantiles"] = {{"q05", q[0]}, {"q25", q[1]}, {"q50", q[2]}, {"q75", q[3]},
                          {"q95", q[4]}};
  // Stationary summary: time average of the ensemble mean over the second
  // half of the horizon.
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < stats.times.size(); ++i)
    if (stats.times[i] >= 0.5 * stats.horizon) {
      acc += stats.mean[i];
      ++n;
    }
  r["time_averaged_mean"] = n > 0 ? acc / static_cast<double>(n) : stats.mean.back();
  return r;
}

inline void add_exit_report(nlohmann::json& results, const EnsembleStats& stats) {
  if (stats.exit_times.empty() && stats.exit_censored == 0) return;
  const ExitSummary s = exit_time_stats(stats);
  results["exit_times"] = {{"mean", s.mean},
                           {"median", s.median},
                           {"censored_mean", s.censored_mean},
                           {"count_escaped", s.count_escaped},
                           {"count_censored", s.count_censored},
                           {"horizon", s.horizon}};
}

}  // namespace detail

/// Context shared by the mode handlers: resolved settings, canonical hash and
/// the output directory (created on construction).
class RunSession {
 public:
  RunSession(ConfigMap resolved, const ConfigMap& user, const std::string& label)
      : resolved_(std::move(resolved)), hash_(resolved_.hash()) {
    std::string dir = user.get_string("output_dir", "");
    if (dir.empty()) {
      const char* env = std::getenv("SMR_OUTPUT_DIR");
      const std::string base = env ? env : "runs";
      dir = base + "/" + label + "-" + hash_.substr(0, 8);
    }
    dir_ = dir;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory: " + dir_.string());
  }

  const ConfigMap& resolved() const { return resolved_; }
  const std::string& hash() const { return hash_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::string path_of(const std::string& name) const { return (dir_ / name).string(); }

  RunResult finish(RunMode mode, std::uint64_t seed, nlohmann::json results,
                   std::vector<std::string> files,
                   std::chrono::steady_clock::time_point started) const {
    RunResult out;
    out.output_dir = dir_;
    out.config_hash = hash_;
    nlohmann::json& s = out.summary;
    s["config_hash"] = hash_;
    s["mode"] = to_string(mode);
    if (resolved_.has("model")) s["model"] = resolved_.get_string("model", "");
    s["seed"] = seed;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : resolved_.entries()) cfg[k] = v;
    s["config"] = std::move(cfg);
    s["results"] = std::move(results);
    s["runtime_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    auto jf = detail::open_output(path_of("summary.json"));
    jf << s.dump(2) << "\n";
    files.push_back("summary.json");
    out.files = std::move(files);
    return out;
  }

 private:
  ConfigMap resolved_;
  std::string hash_;
  std::filesystem::path dir_;
};

namespace detail {

/// Ensemble options resolved against the preset defaults, echoed into the
/// canonical config.
template <class Scalar>
EnsembleOptions resolve_ensemble(const ModelT<Scalar>& model, const ConfigMap& cfg,
                                 ConfigMap& resolved) {
  EnsembleOptions opts = model.defaults;
  opts.h0 = cfg.get_double("h0", opts.h0);
  opts.T = cfg.get_double("T", opts.T);
  opts.dt = cfg.get_double("dt", opts.dt);
  opts.n_paths = cfg.get_u64("n_paths", opts.n_paths);
  opts.seed = cfg.get_u64("seed", opts.seed);
  opts.scheme = parse_scheme(cfg.get_string("scheme", to_string(model.default_scheme)));
  opts.series_points = cfg.get_u64("series_points", opts.series_points);
  opts.store_paths_stride = cfg.get_u64("store_paths", 0);
  opts.histogram_bins = cfg.get_u64("histogram_bins", 0);
  if (cfg.has("exit_lo") != cfg.has("exit_hi"))
    throw ConfigError("exit_lo and exit_hi must be given together");
  if (cfg.has("exit_lo"))
    opts.exit_region = {cfg.get_double("exit_lo", 0.0), cfg.get_double("exit_hi", 0.0)};

  if (!(opts.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(opts.T >= opts.dt)) throw ConfigError("T must be at least dt");
  if (opts.n_paths < 1) throw ConfigError("n_paths must be at least 1");
  if (opts.series_points < 2) throw ConfigError("series_points must be at least 2");

  resolved.set_double("h0", opts.h0);
  resolved.set_double("T", opts.T);
  resolved.set_double("dt", opts.dt);
  resolved.set_u64("n_paths", opts.n_paths);
  resolved.set_u64("seed", opts.seed);
  resolved.set("scheme", to_string(opts.scheme));
  resolved.set_u64("series_points", opts.series_points);
  resolved.set_u64("store_paths", opts.store_paths_stride);
  resolved.set_u64("histogram_bins", opts.histogram_bins);
  if (opts.exit_region) {
    resolved.set_double("exit_lo", opts.exit_region->first);
    resolved.set_double("exit_hi", opts.exit_region->second);
  }
  return opts;
}

template <class Scalar>
nlohmann::json model_report(const ModelT<Scalar>& model) {
  nlohmann::json r = nlohmann::json::object();
  if (model.h_star) r["h_star"] = *model.h_star;
  if (model.relaxation_rate) r["relaxation_rate"] = *model.relaxation_rate;
  return r;
}

/// Mode `reduced`: integrate the scalar reduced SDE. `reduced_form=closed`
/// (default) uses the preset's shipped scalar form matching the scheme;
/// `reduced_form=pipeline` evaluates drift and diffusion through the generic
/// reduction at v = 0 instead (much slower; meant for comparison runs).
template <class Scalar>
RunResult run_reduced(const ModelT<Scalar>& model, const ConfigMap& cfg, ConfigMap&& res) {
  const auto started = std::chrono::steady_clock::now();
  EnsembleOptions opts = resolve_ensemble(model, cfg, res);
  const std::string form = cfg.get_string("reduced_form", "closed");
  if (form != "closed" && form != "pipeline")
    throw ConfigError("unknown reduced_form '" + form + "' (expected closed or pipeline)");
  res.set("reduced_form", form);

  ScalarSde sde;
  if (form == "pipeline") {
    sde = make_reduced_sde(model.problem, model.chart);
    if (opts.scheme == Scheme::euler_maruyama) sde = strat_to_ito(sde);
  } else {
    sde = opts.scheme == Scheme::heun ? model.strat_form : model.ito_form;
  }

  RunSession session(std::move(res), cfg, model.name + "-reduced");
  const EnsembleStats stats = run_ensemble(sde, opts);
  if (stats.n_completed() == 0)
    throw DivergenceError("reduced run: every path diverged", opts.T);

  std::vector<std::string> files{"series.csv", "histogram.csv"};
  write_series_csv(session.path_of("series.csv"), stats, session.hash(), opts.seed);
  write_histogram_csv(session.path_of("histogram.csv"), stats.final_histogram, session.hash(),
                      opts.seed);
  if (!stats.stored_paths.empty()) {
    write_paths_csv(session.path_of("paths.csv"), stats, session.hash(), opts.seed);
    files.push_back("paths.csv");
  }

  nlohmann::json results = stats_report(stats);
  results.update(model_report(model));
  add_exit_report(results, stats);
  return session.finish(RunMode::reduced, opts.seed, std::move(results), std::move(files),
                        started);
}

/// Modes `full-spde` and `coupled`: ensemble of field simulations summarized
/// through the projected slow coordinate.
template <class Scalar>
RunResult run_field(const ModelT<Scalar>& model, RunMode mode, const ConfigMap& cfg,
                    ConfigMap&& res) {
  const auto started = std::chrono::steady_clock::now();
  EnsembleOptions opts = resolve_ensemble(model, cfg, res);
  const int n_modes = static_cast<int>(
      cfg.get_u64("n_modes", static_cast<std::uint64_t>(model.default_n_modes)));
  if (n_modes < 1) throw ConfigError("n_modes must be at least 1");
  res.set_u64("n_modes", static_cast<std::uint64_t>(n_modes));

  RunSession session(std::move(res), cfg, model.name + "-" + to_string(mode));

  const auto n_steps = static_cast<std::size_t>(std::llround(opts.T / opts.dt));
  const auto slice_step = slice_steps(n_steps, opts.series_points);
  std::vector<double> times(slice_step.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    times[i] = static_cast<double>(slice_step[i]) * opts.dt;

  const FieldPaths sim = mode == RunMode::full_spde
                             ? simulate_full_paths(model, opts, n_modes, slice_step, n_steps)
                             : simulate_coupled_paths(model, opts, n_modes, slice_step, n_steps);
  const std::size_t survivors = sim.paths.size() - sim.n_diverged - sim.n_tube_exits;
  if (survivors == 0) {
    if (sim.n_tube_exits > 0)
      throw TubeExitError("field run: every path left the manifold tube", opts.T);
    throw DivergenceError("field run: every path diverged", opts.T);
  }

  const EnsembleStats stats =
      summarize_series(times, sim.paths, opts.histogram_bins, opts.store_paths_stride);

  std::vector<std::string> files{"series.csv", "histogram.csv"};
  write_series_csv(session.path_of("series.csv"), stats, session.hash(), opts.seed);
  write_histogram_csv(session.path_of("histogram.csv"), stats.final_histogram, session.hash(),
                      opts.seed);
  if (!stats.stored_paths.empty()) {
    write_paths_csv(session.path_of("paths.csv"), stats, session.hash(), opts.seed);
    files.push_back("paths.csv");
  }

  nlohmann::json results = stats_report(stats);
  results["n_tube_exits"] = sim.n_tube_exits;
  results["n_diverged"] = sim.n_diverged;
  if (mode == RunMode::coupled) results["max_ortho_residual"] = sim.max_ortho_residual;
  results.update(model_report(model));
  return session.finish(mode, opts.seed, std::move(results), std::move(files), started);
}

/// Mode `equivalence`: full SPDE vs. coupled system on shared noise.
template <class Scalar>
RunResult run_equivalence(const ModelT<Scalar>& model, const ConfigMap& cfg, ConfigMap&& res) {
  const auto started = std::chrono::steady_clock::now();
  const EnsembleOptions opts = resolve_ensemble(model, cfg, res);
  EquivalenceOptions eo;
  eo.T = opts.T;
  eo.dt = opts.dt;
  eo.n_paths = opts.n_paths;
  eo.seed = opts.seed;
  eo.n_modes = static_cast<int>(
      cfg.get_u64("n_modes", static_cast<std::uint64_t>(model.default_n_modes)));
  eo.compare_stride = cfg.get_u64("compare_stride", 10);
  if (eo.compare_stride < 1) throw ConfigError("compare_stride must be at least 1");
  res.set_u64("n_modes", static_cast<std::uint64_t>(eo.n_modes));
  res.set_u64("compare_stride", eo.compare_stride);

  RunSession session(std::move(res), cfg, model.name + "-equivalence");

  Params h0(1);
  h0[0] = opts.h0;
  const auto report =
      equivalence_check(model.problem, model.chart, h0, FieldT<Scalar>::zero(model.grid), eo);

  std::vector<std::vector<double>> rows;
  rows.reserve(report.paths.size());
  for (std::size_t p = 0; p < report.paths.size(); ++p) {
    const auto& pr = report.paths[p];
    rows.push_back({static_cast<double>(p), pr.sup_field_diff, pr.h_full_final,
                    pr.h_coupled_final, pr.tube_exit ? 1.0 : 0.0, pr.tube_exit_time});
  }
  write_table_csv(session.path_of("equivalence.csv"),
                  "path,sup_field_diff,h_full_final,h_coupled_final,tube_exit,tube_exit_time",
                  rows, session.hash(), opts.seed);

  nlohmann::json results;
  results["n_paths"] = report.paths.size();
  results["n_tube_exits"] = report.n_tube_exits;
  results["mean_h_full"] = report.mean_h_full;
  results["var_h_full"] = report.var_h_full;
  results["mean_h_coupled"] = report.mean_h_coupled;
  results["var_h_coupled"] = report.var_h_coupled;
  results["max_sup_field_diff"] = report.max_sup_field_diff;
  results["mean_sup_field_diff"] = report.mean_sup_field_diff;
  results.update(model_report(model));
  return session.finish(RunMode::equivalence, opts.seed, std::move(results),
                        {"equivalence.csv"}, started);
}

/// Mode `covariance-test`: Monte Carlo check of the quadratic-covariation
/// identity <f,dW><g,dW> = <f,Qg> dt on a fixed randomized probe set. Fails
/// with a verification error when any probe misses by more than 5 standard
/// errors (files are written either way).
inline RunResult run_covariance(const ConfigMap& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const std::size_t noise_modes = cfg.get_u64("noise_modes", 8);
  const std::size_t n_samples = cfg.get_u64("n_samples", 100000);
  const std::size_t n_probes = cfg.get_u64("n_probes", 10);
  const std::size_t n_points = cfg.get_u64("n_points", 256);
  const double dt = cfg.get_double("dt", 1e-3);
  if (noise_modes < 1) throw ConfigError("noise_modes must be at least 1");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");

  ConfigMap res;
  res.set("mode", to_string(RunMode::covariance_test));
  res.set_u64("seed", seed);
  res.set_u64("noise_modes", noise_modes);
  res.set_u64("n_samples", n_samples);
  res.set_u64("n_probes", n_probes);
  res.set_u64("n_points", n_points);
  res.set_double("dt", dt);
  RunSession session(std::move(res), cfg, "covariance-test");

  const Grid1D grid(0.0, 1.0, n_points, BoundaryCondition::dirichlet);
  const QWienerSpec spec = white_noise_truncation(grid, noise_modes);
  // Probes span more modes than the noise keeps, so truncation is exercised.
  const auto basis = basis_modes(grid, noise_modes + 8);
  NoiseStream probe_rng(seed, 0);
  auto random_probe = [&]() {
    Field f = Field::zero(grid);
    for (std::size_t k = 0; k < basis.size(); ++k)
      f = f.add_scaled(probe_rng.normal() / static_cast<double>(k + 1), basis[k]);
    return f;
  };

  std::vector<std::vector<double>> rows;
  double worst_ratio = 0.0;
  bool pass = true;
  for (std::size_t i = 0; i < n_probes; ++i) {
    const Field f = random_probe();
    const Field g = random_probe();
    NoiseStream mc(seed, i + 1);
    const auto r = covariance_check(spec, f, g, n_samples, dt, mc);
    const double diff = std::abs(r.empirical - r.exact);
    const double ratio = r.stderr_est > 0.0 ? diff / r.stderr_est : 0.0;
    worst_ratio = std::max(worst_ratio, ratio);
    if (diff > 5.0 * r.stderr_est) pass = false;
    rows.push_back({static_cast<double>(i), r.empirical, r.exact, r.stderr_est, diff, ratio});
  }
  write_table_csv(session.path_of("covariance.csv"),
                  "probe,empirical,exact,stderr,abs_diff,stderr_ratio", rows, session.hash(),
                  seed);

  nlohmann::json results;
  results["n_probes"] = n_probes;
  results["n_samples"] = n_samples;
  results["noise_modes"] = noise_modes;
  results["worst_stderr_ratio"] = worst_ratio;
  results["pass"] = pass;
  RunResult out = session.finish(RunMode::covariance_test, seed, std::move(results),
                                 {"covariance.csv"}, started);
  if (!pass)
    throw VerificationError("covariance-test: a probe missed the exact pairing by more "
                            "than 5 standard errors (see covariance.csv)");
  return out;
}

template <class Scalar>
RunResult dispatch_mode(const ModelT<Scalar>& model, RunMode mode, const ConfigMap& cfg,
                        ConfigMap&& res) {
  switch (mode) {
    case RunMode::reduced: return run_reduced(model, cfg, std::move(res));
    case RunMode::full_spde:
    case RunMode::coupled: return run_field(model, mode, cfg, std::move(res));
    case RunMode::equivalence: return run_equivalence(model, cfg, std::move(res));
    default: throw ConfigError("covariance-test does not take a model");
  }
}

}  // namespace detail

/// Execute one run described by a flat key=value configuration (file values
/// overlaid with CLI flags by the caller). Writes CSV outputs plus
/// summary.json into the resolved output directory and returns the summary.
/// The canonical config hash covers every simulation-relevant setting and is
/// embedded in each output file; the output directory itself is not hashed.
inline RunResult execute_run(const ConfigMap& cfg) {
  const RunMode mode = parse_run_mode(cfg.get_string("mode", "reduced"));
  if (mode == RunMode::covariance_test) return detail::run_covariance(cfg);

  const std::string name = cfg.get_string("model", "");
  if (name.empty())
    throw ConfigError("mode " + to_string(mode) + " requires a model (see list-models)");

  ConfigMap res;
  res.set("model", name);
  res.set("mode", to_string(mode));

  if (name == "damped_wave") {
    const double gamma = cfg.get_double("gamma", 10.0);
    const double eps = cfg.get_double("eps", 0.5);
    const std::string diffusion = cfg.get_string("diffusion", "channel");
    const std::size_t n_points = cfg.get_u64("n_points", 128);
    const std::size_t noise_modes = cfg.get_u64("noise_modes", 8);
    res.set_double("gamma", gamma);
    res.set_double("eps", eps);
    res.set("diffusion", diffusion);
    res.set_u64("n_points", n_points);
    res.set_u64("noise_modes", noise_modes);
    const auto model =
        damped_wave(gamma, eps, parse_diffusion_kind(diffusion), n_points, noise_modes);
    return detail::dispatch_mode(model, mode, cfg, std::move(res));
  }
  if (name == "allen_cahn") {
    const double length = cfg.get_double("length", 20.0);
    const double eps = cfg.get_double("eps", 0.1);
    const std::string diffusion = cfg.get_string("diffusion", "channel");
    const std::size_t n_points = cfg.get_u64("n_points", 1024);
    const std::size_t noise_modes = cfg.get_u64("noise_modes", 8);
    res.set_double("length", length);
    res.set_double("eps", eps);
    res.set("diffusion", diffusion);
    res.set_u64("n_points", n_points);
    res.set_u64("noise_modes", noise_modes);
    const auto model =
        allen_cahn(length, eps, parse_diffusion_kind(diffusion), n_points, noise_modes);
    return detail::dispatch_mode(model, mode, cfg, std::move(res));
  }
  if (name == "nls_soliton") {
    const double eps = cfg.get_double("eps", 0.1);
    const double half_width = cfg.get_double("half_width", 20.0);
    const std::size_t n_points = cfg.get_u64("n_points", 1024);
    res.set_double("eps", eps);
    res.set_double("half_width", half_width);
    res.set_u64("n_points", n_points);
    const auto model = nls_soliton(eps, half_width, n_points);
    return detail::dispatch_mode(model, mode, cfg, std::move(res));
  }
  if (name == "swift_hohenberg") {
    const double delta = cfg.get_double("delta", 0.1);
    const double eps = cfg.get_double("eps", 0.05);
    const std::size_t n_points = cfg.get_u64("n_points", 512);
    res.set_double("delta", delta);
    res.set_double("eps", eps);
    res.set_u64("n_points", n_points);
    const auto model = swift_hohenberg(delta, eps, n_points);
    return detail::dispatch_mode(model, mode, cfg, std::move(res));
  }
  throw ConfigError("unknown model '" + name +
                    "' (expected damped_wave, allen_cahn, nls_soliton, swift_hohenberg)");
}

/// Catalog entry as a config-schema object: every key feeds back into
/// execute_run unchanged.
inline nlohmann::json model_catalog_json() {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& card : model_catalog()) {
    nlohmann::json m;
    m["model"] = card.name;
    m["description"] = card.description;
    for (const auto& [k, v] : card.params) m[k] = v;
    m["interpretation"] = card.interpretation;
    m["scheme"] = card.default_scheme;
    m["h0"] = card.h0;
    m["T"] = card.T;
    m["dt"] = card.dt;
    m["n_paths"] = card.n_paths;
    out.push_back(std::move(m));
  }
  return out;
}

inline std::string format_model_table() {
  std::string out;
  for (const auto& card : model_catalog()) {
    out += card.name + ": " + card.description + "\n";
    out += "  params:";
    for (const auto& [k, v] : card.params) out += " " + k + "=" + format_double(v);
    out += "\n  defaults: scheme=" + card.default_scheme + " h0=" + format_double(card.h0) +
           " T=" + format_double(card.T) + " dt=" + format_double(card.dt) +
           " n_paths=" + format_u64(card.n_paths) + "\n";
  }
  return out;
}

}  // namespace smr
