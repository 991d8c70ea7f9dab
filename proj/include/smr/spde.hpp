#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "smr/chart.hpp"
#include "smr/problem.hpp"
#include "smr/reduction.hpp"
#include "smr/rng.hpp"
#include "smr/spectral.hpp"

namespace smr {

template <class Scalar>
struct GalerkinStateT {
  Eigen::Vector<Scalar, Eigen::Dynamic> coefficients;
  double t = 0.0;
};

using GalerkinState = GalerkinStateT<double>;

/// Semi-implicit Euler-Maruyama stepper on Laplacian eigenmode coefficients:
/// the linear symbol is treated implicitly per mode, the nonlinearity
/// pseudo-spectrally (reconstruct, evaluate pointwise, project back with 2/3
/// dealiasing), and the noise term explicitly. A Stratonovich-declared problem
/// is converted to its Ito-effective form once at construction.
template <class Scalar>
class GalerkinStepper {
 public:
  using VectorType = Eigen::Vector<Scalar, Eigen::Dynamic>;

  GalerkinStepper(const SpdeProblemT<Scalar>& problem, int n_modes)
      : problem_(problem.interpretation == Interpretation::stratonovich
                     ? problem.ito_effective()
                     : problem),
        ws_(problem.grid, n_modes),
        dealias_cut_((2 * n_modes) / 3) {
    validate_problem(problem_);
    symbol_.resize(n_modes);
    for (int k = 0; k < n_modes; ++k)
      symbol_[k] = problem_.linear_symbol(ws_.wavenumber(k));
  }

  const SpdeProblemT<Scalar>& problem() const { return problem_; }
  const SpectralWorkspaceT<Scalar>& workspace() const { return ws_; }
  Scalar symbol(int k) const { return symbol_[static_cast<std::size_t>(k)]; }
  int dealias_cut() const { return dealias_cut_; }

  /// Projection of a nonlinear-term field with the top third of the mode
  /// range zeroed (2/3 dealiasing rule).
  VectorType dealiased_project(const FieldT<Scalar>& f) const {
    VectorType c = ws_.project(f);
    for (Eigen::Index k = dealias_cut_; k < c.size(); ++k) c[k] = Scalar(0);
    return c;
  }

  GalerkinStateT<Scalar> init(const FieldT<Scalar>& u0) const {
    return {ws_.project(u0), 0.0};
  }

  GalerkinStateT<Scalar> step(const GalerkinStateT<Scalar>& state, double dt,
                              const NoiseIncrementT<Scalar>& inc) const {
    if (!(dt > 0.0)) throw ConfigError("GalerkinStepper::step: dt must be positive");
    if (!state.coefficients.allFinite() || state.coefficients.norm() > 1e6)
      throw DivergenceError("GalerkinStepper::step: state diverged", state.t);
    const FieldT<Scalar> u = ws_.reconstruct(state.coefficients);
    const VectorType nl = dealiased_project(problem_.nonlinear(u));
    const VectorType g = ws_.project(problem_.apply_G(u, inc));
    GalerkinStateT<Scalar> next;
    next.coefficients.resize(state.coefficients.size());
    for (Eigen::Index k = 0; k < state.coefficients.size(); ++k)
      next.coefficients[k] = (state.coefficients[k] + dt * nl[k] + g[k]) /
                             (Scalar(1) - dt * symbol_[static_cast<std::size_t>(k)]);
    next.t = state.t + dt;
    return next;
  }

 private:
  SpdeProblemT<Scalar> problem_;
  SpectralWorkspaceT<Scalar> ws_;
  std::vector<Scalar> symbol_;
  int dealias_cut_;
};

template <class Scalar>
GalerkinStateT<Scalar> step_full_spde(const GalerkinStepper<Scalar>& stepper,
                                      const GalerkinStateT<Scalar>& state, double dt,
                                      const NoiseIncrementT<Scalar>& inc) {
  return stepper.step(state, dt, inc);
}

template <class Scalar>
struct CoupledStateT {
  Params h;
  Eigen::Vector<Scalar, Eigen::Dynamic> v_coefficients;
  double t = 0.0;
  std::uint64_t step_index = 0;
};

using CoupledState = CoupledStateT<double>;

struct CoupledOptions {
  /// 0 = never re-project (the default: orthogonality drift is measured, not
  /// hidden); N > 0 re-enforces tangent orthogonality every N steps.
  std::uint64_t reproject_every = 0;
  double init_ortho_tol = 1e-10;
};

/// Coupled evolution of (h, v): h advances by an explicit Ito Euler-Maruyama
/// step of dh_j = b_j dt + <sigma_j, dW>, v by an explicit step of
///   dv = L(u) dt + G(u) dW - sum_k u_k dh_k - 1/2 sum_kl u_kl S_kl dt,
/// with the same increment. v lives on the same mode span and discrete
/// spatial operators as GalerkinStepper, so the two integrations differ only
/// in their time coupling. The reduction terms reuse the generic pipeline
/// with the drift field evaluated through the Galerkin operators.
template <class Scalar>
class CoupledStepper {
 public:
  using VectorType = Eigen::Vector<Scalar, Eigen::Dynamic>;

  CoupledStepper(const SpdeProblemT<Scalar>& problem, ChartT<Scalar> chart, int n_modes,
                 CoupledOptions opts = {})
      : galerkin_(problem, n_modes), chart_(std::move(chart)), opts_(opts) {
    require_same_grid(galerkin_.problem().grid, chart_.grid(), "CoupledStepper");
  }

  const GalerkinStepper<Scalar>& galerkin() const { return galerkin_; }
  const ChartT<Scalar>& chart() const { return chart_; }
  const SpdeProblemT<Scalar>& problem() const { return galerkin_.problem(); }

  FieldT<Scalar> v_field(const CoupledStateT<Scalar>& s) const {
    return galerkin_.workspace().reconstruct(s.v_coefficients);
  }

  FieldT<Scalar> reconstruct_u(const CoupledStateT<Scalar>& s) const {
    return chart_.eval(s.h) + v_field(s);
  }

  double ortho_residual_of(const CoupledStateT<Scalar>& s) const {
    return ortho_residual(chart_, s.h, v_field(s));
  }

  /// Initial state; enforces the Fermi-coordinate initialization contract
  /// <u_j^h, v> = 0 within init_ortho_tol.
  CoupledStateT<Scalar> init(const Params& h0, const FieldT<Scalar>& v0) const {
    CoupledStateT<Scalar> s;
    s.h = h0;
    s.v_coefficients = galerkin_.workspace().project(v0);
    s.t = 0.0;
    const double res = ortho_residual_of(s);
    if (res > opts_.init_ortho_tol)
      throw InitializationError(
          "CoupledStepper::init: initial v violates tangent orthogonality");
    return s;
  }

  CoupledStateT<Scalar> step(const CoupledStateT<Scalar>& state, double dt,
                             const NoiseIncrementT<Scalar>& inc) const {
    if (!(dt > 0.0)) throw ConfigError("CoupledStepper::step: dt must be positive");
    if (!state.h.allFinite() || !state.v_coefficients.allFinite() ||
        state.h.cwiseAbs().maxCoeff() > 1e6 || state.v_coefficients.norm() > 1e6)
      throw DivergenceError("CoupledStepper::step: state diverged", state.t);
    if (!chart_.in_domain(state.h))
      throw TubeExitError("CoupledStepper::step: h left the chart domain", state.t);

    const auto& ws = galerkin_.workspace();
    const auto& problem = galerkin_.problem();
    const int d = chart_.dim();

    const FieldT<Scalar> v = ws.reconstruct(state.v_coefficients);
    const FieldT<Scalar> u = chart_.eval(state.h) + v;

    // Drift field through the Galerkin operators (same discretization as the
    // full stepper).
    const VectorType u_coeffs = ws.project(u);
    VectorType lu_coeffs = galerkin_.dealiased_project(problem.nonlinear(u));
    for (Eigen::Index k = 0; k < lu_coeffs.size(); ++k)
      lu_coeffs[k] += galerkin_.symbol(static_cast<int>(k)) * u_coeffs[k];
    const FieldT<Scalar> lu = ws.reconstruct(lu_coeffs);

    const auto terms = compute_reduction(problem, chart_, state.h, v, &lu);

    Eigen::VectorXd dh(d);
    for (int j = 0; j < d; ++j)
      dh[j] = terms.b[j] * dt + pair_with_increment(problem.noise, terms.sigma[j], inc);

    // v update, all pieces projected on the mode span.
    const VectorType g_coeffs = ws.project(problem.apply_G(u, inc));
    VectorType v_next = state.v_coefficients + dt * lu_coeffs + g_coeffs;
    for (int k = 0; k < d; ++k) {
      v_next -= dh[k] * ws.project(chart_.d1(state.h, k));
      for (int l = 0; l < d; ++l)
        v_next -= (0.5 * dt * terms.S(k, l)) * ws.project(chart_.d2(state.h, k, l));
    }

    CoupledStateT<Scalar> next;
    next.h = state.h + dh;
    next.v_coefficients = std::move(v_next);
    next.t = state.t + dt;
    next.step_index = state.step_index + 1;

    if (opts_.reproject_every > 0 && next.step_index % opts_.reproject_every == 0)
      reproject(next);
    return next;
  }

 private:
  /// Re-enforce tangent orthogonality by re-running the Fermi projection of
  /// the reconstructed state.
  void reproject(CoupledStateT<Scalar>& s) const {
    const FieldT<Scalar> u = reconstruct_u(s);
    const auto pair = fermi_project(chart_, u, s.h);
    s.h = pair.h;
    s.v_coefficients = galerkin_.workspace().project(pair.v);
  }

  GalerkinStepper<Scalar> galerkin_;
  ChartT<Scalar> chart_;
  CoupledOptions opts_;
};

template <class Scalar>
CoupledStateT<Scalar> step_coupled(const CoupledStepper<Scalar>& stepper,
                                   const CoupledStateT<Scalar>& state, double dt,
                                   const NoiseIncrementT<Scalar>& inc) {
  return stepper.step(state, dt, inc);
}

template <class Scalar>
struct CoupledTrajectoryT {
  std::vector<double> times;                 // every step
  std::vector<Params> h_path;                // every step
  std::vector<double> ortho_residual_path;   // max_j |<u_j^h, v>| every step
  std::vector<std::size_t> v_snapshot_steps;
  std::vector<FieldT<Scalar>> v_snapshots;   // strided
  double max_ortho_residual = 0.0;
};

using CoupledTrajectory = CoupledTrajectoryT<double>;

/// Drive a coupled trajectory for n_steps with increments from one stream,
/// recording h and the orthogonality residual at every step and a v snapshot
/// every `snapshot_stride` steps (0 = endpoints only).
template <class Scalar>
CoupledTrajectoryT<Scalar> run_coupled(const CoupledStepper<Scalar>& stepper,
                                       const CoupledStateT<Scalar>& initial, double dt,
                                       std::size_t n_steps, NoiseStream& stream,
                                       std::size_t snapshot_stride = 0) {
  CoupledTrajectoryT<Scalar> traj;
  traj.times.reserve(n_steps + 1);
  traj.h_path.reserve(n_steps + 1);
  traj.ortho_residual_path.reserve(n_steps + 1);
  CoupledStateT<Scalar> s = initial;
  auto record = [&](const CoupledStateT<Scalar>& st, std::size_t step) {
    traj.times.push_back(st.t);
    traj.h_path.push_back(st.h);
    const double r = stepper.ortho_residual_of(st);
    traj.ortho_residual_path.push_back(r);
    traj.max_ortho_residual = std::max(traj.max_ortho_residual, r);
    const bool want_snapshot =
        step == 0 || step == n_steps ||
        (snapshot_stride > 0 && step % snapshot_stride == 0);
    if (want_snapshot) {
      traj.v_snapshot_steps.push_back(step);
      traj.v_snapshots.push_back(stepper.v_field(st));
    }
  };
  record(s, 0);
  for (std::size_t i = 1; i <= n_steps; ++i) {
    const auto inc = sample_increment(stepper.problem().noise, dt, stream);
    s = stepper.step(s, dt, inc);
    record(s, i);
  }
  return traj;
}

struct EquivalencePathReport {
  double sup_field_diff = 0.0;      // sup_t || u_full - (u^h + v) ||
  double h_full_final = 0.0;        // Fermi coordinate of the full run at T
  double h_coupled_final = 0.0;
  bool tube_exit = false;
  double tube_exit_time = 0.0;
};

struct EquivalenceReport {
  std::vector<EquivalencePathReport> paths;
  double mean_h_full = 0.0, var_h_full = 0.0;
  double mean_h_coupled = 0.0, var_h_coupled = 0.0;
  double max_sup_field_diff = 0.0;
  double mean_sup_field_diff = 0.0;
  std::size_t n_tube_exits = 0;
};

struct EquivalenceOptions {
  double T = 1.0;
  double dt = 1e-3;
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  int n_modes = 12;
  /// Steps between field-difference / projection comparisons.
  std::size_t compare_stride = 10;
};

/// Run the full SPDE and the coupled system with identical per-step noise
/// increments from the same stream, and compare the reconstructed states and
/// projected coordinates. Only one-parameter charts are supported here.
template <class Scalar>
EquivalenceReport equivalence_check(const SpdeProblemT<Scalar>& problem,
                                    const ChartT<Scalar>& chart, const Params& h0,
                                    const FieldT<Scalar>& v0,
                                    const EquivalenceOptions& opts) {
  if (chart.dim() != 1)
    throw UnsupportedError("equivalence_check: only one-parameter charts supported");
  CoupledStepper<Scalar> coupled(problem, chart, opts.n_modes);
  const GalerkinStepper<Scalar>& full = coupled.galerkin();
  const auto n_steps = static_cast<std::size_t>(std::llround(opts.T / opts.dt));

  EquivalenceReport report;
  report.paths.reserve(opts.n_paths);

  for (std::size_t p = 0; p < opts.n_paths; ++p) {
    NoiseStream stream(opts.seed, p);
    EquivalencePathReport pr;
    auto cs = coupled.init(h0, v0);
    auto fs = full.init(chart.eval(h0) + v0);
    Params h_guess = h0;
    try {
      for (std::size_t step = 1; step <= n_steps; ++step) {
        const auto inc = sample_increment(full.problem().noise, opts.dt, stream);
        fs = full.step(fs, opts.dt, inc);
        cs = coupled.step(cs, opts.dt, inc);
        if (step % opts.compare_stride == 0 || step == n_steps) {
          const FieldT<Scalar> u_full = full.workspace().reconstruct(fs.coefficients);
          const FieldT<Scalar> u_coupled = coupled.reconstruct_u(cs);
          pr.sup_field_diff = std::max(pr.sup_field_diff, l2_norm(u_full - u_coupled));
          const auto pair = fermi_project(chart, u_full, h_guess);
          h_guess = pair.h;
        }
      }
      const FieldT<Scalar> u_full = full.workspace().reconstruct(fs.coefficients);
      pr.h_full_final = fermi_project(chart, u_full, h_guess).h[0];
      pr.h_coupled_final = cs.h[0];
    } catch (const TubeExitError& e) {
      pr.tube_exit = true;
      pr.tube_exit_time = e.time;
      ++report.n_tube_exits;
    }
    report.paths.push_back(pr);
  }

  std::size_t n_ok = 0;
  for (const auto& pr : report.paths) {
    if (pr.tube_exit) continue;
    ++n_ok;
    report.mean_h_full += pr.h_full_final;
    report.mean_h_coupled += pr.h_coupled_final;
    report.mean_sup_field_diff += pr.sup_field_diff;
    report.max_sup_field_diff = std::max(report.max_sup_field_diff, pr.sup_field_diff);
  }
  if (n_ok > 0) {
    report.mean_h_full /= static_cast<double>(n_ok);
    report.mean_h_coupled /= static_cast<double>(n_ok);
    report.mean_sup_field_diff /= static_cast<double>(n_ok);
  }
  if (n_ok > 1) {
    for (const auto& pr : report.paths) {
      if (pr.tube_exit) continue;
      report.var_h_full += (pr.h_full_final - report.mean_h_full) *
                           (pr.h_full_final - report.mean_h_full);
      report.var_h_coupled += (pr.h_coupled_final - report.mean_h_coupled) *
                              (pr.h_coupled_final - report.mean_h_coupled);
    }
    report.var_h_full /= static_cast<double>(n_ok - 1);
    report.var_h_coupled /= static_cast<double>(n_ok - 1);
  }
  return report;
}

}  // namespace smr
