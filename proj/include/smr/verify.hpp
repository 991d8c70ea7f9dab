#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "smr/config.hpp"
#include "smr/ensemble.hpp"
#include "smr/models.hpp"
#include "smr/modes.hpp"
#include "smr/noise.hpp"
#include "smr/reduction.hpp"
#include "smr/runner.hpp"
#include "smr/sde.hpp"
#include "smr/spde.hpp"

namespace smr {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace checks {

namespace detail {

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return xs;
}

/// Central sample moments of the final states: mean, variance (unbiased),
/// fourth central moment.
struct Moments {
  double mean = 0.0, var = 0.0, m4 = 0.0;
  std::size_t n = 0;
};

inline Moments moments_of(const std::vector<double>& xs) {
  Moments m;
  m.n = xs.size();
  if (m.n < 2) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(m.n);
  double s2 = 0.0, s4 = 0.0;
  for (double x : xs) {
    const double d = x - m.mean;
    s2 += d * d;
    s4 += d * d * d * d;
  }
  m.var = s2 / static_cast<double>(m.n - 1);
  m.m4 = s4 / static_cast<double>(m.n);
  return m;
}

inline double se_mean(const Moments& m) { return std::sqrt(m.var / static_cast<double>(m.n)); }

/// Standard error of the sample variance from empirical fourth moments; no
/// normality assumption (the ensembles here are heavy-tailed).
inline double se_var(const Moments& m) {
  const double v = std::max(m.m4 - m.var * m.var, 0.0);
  return std::sqrt(v / static_cast<double>(m.n));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace detail

/// Monte Carlo check of the covariation identity <f,dW><g,dW> = <f,Qg> dt on
/// 10 seeded random probe pairs against an 8-mode truncation.
inline CheckResult covariance_identity() {
  const Grid1D grid(0.0, 1.0, 256, BoundaryCondition::dirichlet);
  const QWienerSpec spec = white_noise_truncation(grid, 8);
  const auto basis = basis_modes(grid, 16);
  NoiseStream probe_rng(2024, 0);
  auto random_probe = [&]() {
    Field f = Field::zero(grid);
    for (std::size_t k = 0; k < basis.size(); ++k)
      f = f.add_scaled(probe_rng.normal() / static_cast<double>(k + 1), basis[k]);
    return f;
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    const Field f = random_probe();
    const Field g = random_probe();
    NoiseStream mc(2024, i + 1);
    const auto r = covariance_check(spec, f, g, 100000, 1e-3, mc);
    worst = std::max(worst, std::abs(r.empirical - r.exact) / r.stderr_est);
  }
  return {"covariance-identity", worst <= 5.0,
          "10 probes, 8 modes, 1e5 samples; worst |diff|/stderr = " + detail::num(worst) +
              " (need <= 5)"};
}

/// Closed-form constants: squared translation-mode norm of the soliton,
/// stripe fixed-point amplitude, and its noiseless relaxation rate.
inline CheckResult closed_form_constants() {
  const auto soliton = nls_soliton();
  Params h0(1);
  h0[0] = 0.0;
  const double mode_norm_sq = l2_norm_sq(soliton.chart.d1(h0, 0));
  const double err_norm = std::abs(mode_norm_sq - 4.0 / 3.0);

  const auto stripe = swift_hohenberg(0.1, 0.05);
  const double h_star = stripe.h_star.value_or(0.0);
  const double err_h = std::abs(h_star - 0.18371);
  const double rate = stripe.relaxation_rate.value_or(0.0);
  const double err_rate = std::abs(rate - 0.2);

  const bool pass = err_norm <= 1e-6 && err_h <= 1e-5 && err_rate <= 1e-12;
  return {"closed-form-constants", pass,
          "|mode norm^2 - 4/3| = " + detail::num(err_norm) + " (<= 1e-6); h* = " +
              detail::num(h_star) + " (0.18371 +- 1e-5); relaxation rate = " +
              detail::num(rate) + " (0.2)"};
}

namespace detail {

/// Worst pipeline-vs-closed-form mismatch over 50 parameter values, measured
/// in units of the tolerance 1e-6 * (1 + |closed|).
template <class Scalar>
double pipeline_excess(const ModelT<Scalar>& model, double lo, double hi) {
  const ScalarSde pipe = make_reduced_sde(model.problem, model.chart);
  double worst = 0.0;
  for (double h : linspace(lo, hi, 50)) {
    const double b_ref = model.strat_form.drift(h);
    const double s_ref = model.strat_form.diffusion(h);
    worst = std::max(worst, std::abs(pipe.drift(h) - b_ref) / (1e-6 * (1.0 + std::abs(b_ref))));
    worst = std::max(worst,
                     std::abs(pipe.diffusion(h) - s_ref) / (1e-6 * (1.0 + std::abs(s_ref))));
  }
  return worst;
}

}  // namespace detail

/// The generic reduction at v = 0 reproduces every preset's closed-form
/// scalar drift and diffusion on the parameter ranges the ensembles explore.
inline CheckResult pipeline_vs_closed() {
  const double wave = detail::pipeline_excess(damped_wave(), -0.3, 0.3);
  const double front = detail::pipeline_excess(allen_cahn(), 9.0, 11.0);
  const double soliton = detail::pipeline_excess(nls_soliton(), -8.0, 8.0);
  const double stripe = detail::pipeline_excess(swift_hohenberg(), 0.05, 0.4);
  const double worst = std::max(std::max(wave, front), std::max(soliton, stripe));
  return {"pipeline-vs-closed", worst <= 1.0,
          "max |pipeline - closed| / (1e-6*(1+|closed|)): wave " + detail::num(wave) +
              ", front " + detail::num(front) + ", soliton " + detail::num(soliton) +
              ", stripe " + detail::num(stripe) + " (need <= 1)"};
}

/// Weak agreement of the two calculi: Euler-Maruyama on the Ito form against
/// Heun on the Stratonovich form, independent ensembles, empirical standard
/// errors (fourth-moment based for the variance; the horizon distribution is
/// heavy-tailed).
inline CheckResult ito_stratonovich_agreement() {
  const auto model = damped_wave();
  EnsembleOptions opts = model.defaults;
  opts.n_paths = 10000;
  opts.series_points = 2;

  opts.scheme = Scheme::euler_maruyama;
  opts.seed = 41;
  const auto em = run_ensemble(model.ito_form, opts);
  opts.scheme = Scheme::heun;
  opts.seed = 42;
  const auto heun = run_ensemble(model.strat_form, opts);

  const auto m1 = detail::moments_of(em.final_states);
  const auto m2 = detail::moments_of(heun.final_states);
  const double se_mean = std::sqrt(detail::se_mean(m1) * detail::se_mean(m1) +
                                   detail::se_mean(m2) * detail::se_mean(m2));
  const double se_var = std::sqrt(detail::se_var(m1) * detail::se_var(m1) +
                                  detail::se_var(m2) * detail::se_var(m2));
  const double t_mean = se_mean > 0.0 ? std::abs(m1.mean - m2.mean) / se_mean : 0.0;
  const double t_var = se_var > 0.0 ? std::abs(m1.var - m2.var) / se_var : 0.0;
  return {"ito-stratonovich-agreement", t_mean <= 4.0 && t_var <= 4.0,
          "n = 1e4 each; |dmean|/se = " + detail::num(t_mean) + ", |dvar|/se = " +
              detail::num(t_var) + " (need <= 4)"};
}

/// Tangent orthogonality of the coupled integrator under dt halving: the
/// residual max_t |<u_1^h, v>| either refines at order >= 1 or sits at
/// accumulation-level machine zero outright.
inline CheckResult orthogonality_order() {
  const auto model = damped_wave(10.0, 0.1);
  const CoupledStepper<double> stepper(model.problem, model.chart, 12);
  Params h0(1);
  h0[0] = 0.1;
  const Field v0 = Field::zero(model.grid);
  const double T = 5.0;
  std::vector<double> residuals;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    NoiseStream stream(51, 0);
    const auto n_steps = static_cast<std::size_t>(std::llround(T / dt));
    const auto traj = run_coupled(stepper, stepper.init(h0, v0), dt, n_steps, stream);
    residuals.push_back(traj.max_ortho_residual);
  }
  const bool machine_zero =
      residuals[0] <= 1e-12 && residuals[1] <= 1e-12 && residuals[2] <= 1e-12;
  double min_order = 1e9;
  for (std::size_t i = 0; i + 1 < residuals.size(); ++i)
    min_order = std::min(min_order, std::log2(residuals[i] / residuals[i + 1]));
  return {"orthogonality-preservation", machine_zero || min_order >= 1.0,
          "max residuals " + detail::num(residuals[0]) + " / " + detail::num(residuals[1]) +
              " / " + detail::num(residuals[2]) +
              (machine_zero ? " (all <= 1e-12)"
                            : " (min refinement order " + detail::num(min_order) + ")")};
}

/// Full SPDE vs. coupled system on shared noise: projected-coordinate moments
/// agree at the finer dt, and the per-path reconstruction gap refines at
/// order >= 0.5.
inline CheckResult equivalence() {
  const auto model = damped_wave(10.0, 0.1);
  Params h0(1);
  h0[0] = 0.1;
  const Field v0 = Field::zero(model.grid);
  EquivalenceOptions eo;
  eo.T = 10.0;
  eo.n_paths = 100;
  eo.seed = 61;
  eo.n_modes = 12;
  eo.compare_stride = 10;

  eo.dt = 1e-2;
  const auto coarse = equivalence_check(model.problem, model.chart, h0, v0, eo);
  eo.dt = 5e-3;
  const auto fine = equivalence_check(model.problem, model.chart, h0, v0, eo);

  const auto n = static_cast<double>(fine.paths.size() - fine.n_tube_exits);
  const double se_mean = std::sqrt((fine.var_h_full + fine.var_h_coupled) / n);
  const double t_mean =
      se_mean > 0.0 ? std::abs(fine.mean_h_full - fine.mean_h_coupled) / se_mean : 0.0;
  const double se_var =
      std::sqrt(2.0 / (n - 1.0)) *
      std::sqrt(fine.var_h_full * fine.var_h_full + fine.var_h_coupled * fine.var_h_coupled);
  const double t_var =
      se_var > 0.0 ? std::abs(fine.var_h_full - fine.var_h_coupled) / se_var : 0.0;
  const double order = std::log2(coarse.mean_sup_field_diff / fine.mean_sup_field_diff);

  const bool pass = t_mean <= 4.0 && t_var <= 4.0 && order >= 0.5 &&
                    coarse.n_tube_exits == 0 && fine.n_tube_exits == 0;
  return {"full-vs-coupled-equivalence", pass,
          "|dmean|/se = " + detail::num(t_mean) + ", |dvar|/se = " + detail::num(t_var) +
              " (<= 4); sup-gap order " + detail::num(order) + " (>= 0.5); sup gap " +
              detail::num(fine.max_sup_field_diff)};
}

/// Soliton position moments under the translation-drift Ito form:
/// mean (2/3) eps^2 T and variance (4/3) eps^2 T, each within 5%.
inline CheckResult soliton_moments() {
  const auto model = nls_soliton(0.1);
  EnsembleOptions opts = model.defaults;  // h0 = 0, T = 1e3, dt = 0.1, EM
  opts.n_paths = 10000;
  opts.seed = 71;
  opts.series_points = 2;
  const auto stats = run_ensemble(model.ito_form, opts);
  const auto m = detail::moments_of(stats.final_states);
  const double eps = 0.1, T = opts.T;
  const double mean_ref = (2.0 / 3.0) * eps * eps * T;
  const double var_ref = (4.0 / 3.0) * eps * eps * T;
  const double rel_mean = std::abs(m.mean - mean_ref) / mean_ref;
  const double rel_var = std::abs(m.var - var_ref) / var_ref;
  return {"soliton-moments", rel_mean <= 0.05 && rel_var <= 0.05,
          "mean " + detail::num(m.mean) + " vs " + detail::num(mean_ref) + " (rel " +
              detail::num(rel_mean) + "), var " + detail::num(m.var) + " vs " +
              detail::num(var_ref) + " (rel " + detail::num(rel_var) + "); need <= 0.05"};
}

/// Metastability phenomenology: wave-amplitude final histogram symmetry,
/// front confinement near the domain center, and stripe-amplitude exit times
/// ordered by noise strength.
inline CheckResult metastability() {
  // Final-state symmetry of the wave amplitude.
  const auto wave = damped_wave();
  EnsembleOptions wo = wave.defaults;
  wo.n_paths = 10000;
  wo.seed = 81;
  wo.series_points = 2;
  const auto wstats = run_ensemble(wave.strat_form, wo);
  const double skew = wstats.final_skewness;
  const bool sym_ok = std::abs(skew) < 0.1;

  // Front confinement: |h - h0| < 1 for at least 99% of paths over T = 1e4.
  const auto front = allen_cahn();
  EnsembleOptions fo = front.defaults;  // h0 = 10, T = 1e4, dt = 0.1
  fo.n_paths = 1000;
  fo.seed = 82;
  fo.series_points = 2;
  fo.exit_region = {{fo.h0 - 1.0, fo.h0 + 1.0}};
  const auto fstats = run_ensemble(front.strat_form, fo);
  const double inside =
      static_cast<double>(fstats.exit_censored) / static_cast<double>(fstats.n_completed());
  const bool front_ok = inside >= 0.99;

  // Stripe exit times from [h*/2, 3h*/2] strictly increase as eps decreases.
  std::vector<double> censored_means;
  for (double eps : {0.1, 0.075, 0.05}) {
    const auto stripe = swift_hohenberg(0.1, eps);
    EnsembleOptions so = stripe.defaults;
    so.h0 = stripe.h_star.value();
    so.T = 2000.0;
    so.dt = 0.1;
    so.n_paths = 400;
    so.seed = 83;
    so.series_points = 2;
    so.scheme = Scheme::euler_maruyama;
    so.exit_region = {{0.5 * so.h0, 1.5 * so.h0}};
    const auto sstats = run_ensemble(stripe.ito_form, so);
    censored_means.push_back(exit_time_stats(sstats).censored_mean);
  }
  const bool exits_ok =
      censored_means[0] < censored_means[1] && censored_means[1] < censored_means[2];

  return {"metastability", sym_ok && front_ok && exits_ok,
          "wave skewness " + detail::num(skew) + " (|.| < 0.1: " + (sym_ok ? "yes" : "no") +
              "); front inside fraction " + detail::num(inside) + " (>= 0.99: " +
              (front_ok ? "yes" : "no") + "); exit censored means " +
              detail::num(censored_means[0]) + " < " + detail::num(censored_means[1]) +
              " < " + detail::num(censored_means[2]) + " (" + (exits_ok ? "yes" : "no") + ")"};
}

/// Integrator oracles: Heun reproduces the Stratonovich geometric mean law,
/// and Euler-Maruyama shows weak order about one on geometric Brownian motion
/// against the exact expectation.
inline CheckResult integrator_oracles() {
  // Heun on dh = eps h o dB: E[h(T)] = h0 exp(eps^2 T / 2).
  ScalarSde gbm_strat;
  gbm_strat.interpretation = Interpretation::stratonovich;
  gbm_strat.drift = [](double) { return 0.0; };
  gbm_strat.diffusion = [](double h) { return 0.2 * h; };
  gbm_strat.diffusion_prime = [](double) { return 0.2; };
  EnsembleOptions ho;
  ho.h0 = 1.0;
  ho.T = 1.0;
  ho.dt = 1e-3;
  ho.n_paths = 100000;
  ho.seed = 91;
  ho.scheme = Scheme::heun;
  ho.series_points = 2;
  const auto hstats = run_ensemble(gbm_strat, ho);
  const auto hm = detail::moments_of(hstats.final_states);
  const double target = std::exp(0.5 * 0.2 * 0.2 * 1.0);
  const double t_heun = std::abs(hm.mean - target) / detail::se_mean(hm);
  const bool heun_ok = t_heun <= 4.0;

  // EM weak order on dh = h dt + 0.2 h dB (Ito): bias of E[h(1)] vs e.
  ScalarSde gbm_ito;
  gbm_ito.interpretation = Interpretation::ito;
  gbm_ito.drift = [](double h) { return h; };
  gbm_ito.diffusion = [](double h) { return 0.2 * h; };
  gbm_ito.diffusion_prime = [](double) { return 0.2; };
  std::vector<double> bias;
  std::uint64_t seed = 92;
  for (double dt : {0.1, 0.05, 0.025}) {
    EnsembleOptions eo;
    eo.h0 = 1.0;
    eo.T = 1.0;
    eo.dt = dt;
    eo.n_paths = 100000;
    eo.seed = seed++;
    eo.scheme = Scheme::euler_maruyama;
    eo.series_points = 2;
    const auto stats = run_ensemble(gbm_ito, eo);
    bias.push_back(std::abs(detail::moments_of(stats.final_states).mean - std::exp(1.0)));
  }
  const double order =
      0.5 * (std::log2(bias[0] / bias[1]) + std::log2(bias[1] / bias[2]));
  const bool em_ok = order >= 0.6 && order <= 1.4;

  return {"integrator-oracles", heun_ok && em_ok,
          "Heun geometric-mean |err|/se = " + detail::num(t_heun) +
              " (<= 4); EM weak order " + detail::num(order) + " (in [0.6, 1.4])"};
}

/// Byte-identical outputs for repeated runs with the same configuration and
/// seed, for both a reduced run and a coupled field run.
inline CheckResult determinism() {
  auto run_pair = [](ConfigMap cfg, const std::string& tag) {
    cfg.set("output_dir", "acceptance-runs/" + tag + "-a");
    const auto a = execute_run(cfg);
    cfg.set("output_dir", "acceptance-runs/" + tag + "-b");
    const auto b = execute_run(cfg);
    bool same = true;
    for (const auto& f : a.files) {
      if (f == "summary.json") continue;  // carries wall-clock runtime
      same = same && detail::read_file((a.output_dir / f).string()) ==
                         detail::read_file((b.output_dir / f).string());
    }
    return same;
  };

  ConfigMap reduced;
  reduced.set("model", "damped_wave");
  reduced.set("mode", "reduced");
  reduced.set("n_paths", "200");
  reduced.set("T", "2");
  reduced.set("seed", "101");
  reduced.set("store_paths", "50");
  const bool reduced_same = run_pair(reduced, "det-reduced");

  ConfigMap coupled;
  coupled.set("model", "damped_wave");
  coupled.set("mode", "coupled");
  coupled.set("n_paths", "4");
  coupled.set("T", "0.5");
  coupled.set("dt", "0.01");
  coupled.set("seed", "102");
  const bool coupled_same = run_pair(coupled, "det-coupled");

  return {"determinism", reduced_same && coupled_same,
          std::string("reduced outputs byte-identical: ") + (reduced_same ? "yes" : "no") +
              "; coupled outputs byte-identical: " + (coupled_same ? "yes" : "no")};
}

}  // namespace checks

inline const std::vector<std::pair<std::string, std::function<CheckResult()>>>&
acceptance_suite() {
  static const std::vector<std::pair<std::string, std::function<CheckResult()>>> suite = {
      {"covariance-identity", checks::covariance_identity},
      {"closed-form-constants", checks::closed_form_constants},
      {"pipeline-vs-closed", checks::pipeline_vs_closed},
      {"ito-stratonovich-agreement", checks::ito_stratonovich_agreement},
      {"orthogonality-preservation", checks::orthogonality_order},
      {"full-vs-coupled-equivalence", checks::equivalence},
      {"soliton-moments", checks::soliton_moments},
      {"metastability", checks::metastability},
      {"integrator-oracles", checks::integrator_oracles},
      {"determinism", checks::determinism},
  };
  return suite;
}

/// Run one named (or 1-based indexed) check, or all when `which` is empty.
/// Prints one [PASS]/[FAIL] line per check; returns the failure count.
inline int run_acceptance(std::ostream& out, const std::string& which = "") {
  const auto& suite = acceptance_suite();
  int failures = 0;
  bool matched = false;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& [name, fn] = suite[i];
    if (!which.empty() && which != name && which != std::to_string(i + 1)) continue;
    matched = true;
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {name, false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " (" << checks::detail::num(secs)
        << "s): " << r.detail << "\n";
    if (!r.pass) ++failures;
  }
  if (!which.empty() && !matched) {
    out << "unknown check '" << which << "'\n";
    return 1;
  }
  return failures;
}

}  // namespace smr
