#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smr/chart.hpp"
#include "smr/ensemble.hpp"
#include "smr/modes.hpp"
#include "smr/noise.hpp"
#include "smr/problem.hpp"
#include "smr/reduction.hpp"
#include "smr/sde.hpp"

namespace smr {

/// A preset: one SPDE, its slow-manifold chart, and the closed-form reduced
/// SDE it is known to project onto. The problem is declared in Stratonovich
/// form (matching the displayed equations); `ito_form` is the authoritative
/// Ito-form scalar reduction shipped with the model, which for the soliton
/// preset carries the full noise-induced translation drift rather than the
/// one-dimensional chain-rule conversion of `strat_form`.
template <class Scalar>
struct ModelT {
  std::string name;
  std::string description;
  std::map<std::string, double> params;
  Grid1D grid;
  ChartT<Scalar> chart;
  SpdeProblemT<Scalar> problem;
  ScalarSde strat_form;
  ScalarSde ito_form;
  Scheme default_scheme = Scheme::heun;
  int default_n_modes = 16;
  EnsembleOptions defaults;
  std::optional<double> h_star;
  std::optional<double> relaxation_rate;
};

using RealModel = ModelT<double>;
using ComplexModel = ModelT<std::complex<double>>;

/// Overdamped stochastic wave amplitude on [0, 1] with Dirichlet walls:
///   du = (Laplacian u - 4 u^3) / gamma dt + eps u o db,
/// slow manifold u^h = h sin(pi x), reduced form
///   dh = (-(pi^2/gamma) h - (3/gamma) h^3) dt + eps h o db.
inline RealModel damped_wave(double gamma = 10.0, double eps = 0.5,
                             DiffusionKind kind = DiffusionKind::channel_multiplicative,
                             std::size_t n_points = 128, std::size_t noise_modes = 8) {
  if (!(gamma > 0.0)) throw ConfigError("damped_wave: gamma must be positive");
  if (eps < 0.0) throw ConfigError("damped_wave: eps must be nonnegative");
  const Grid1D grid(0.0, 1.0, n_points, BoundaryCondition::dirichlet);

  const Field carrier = Field::from_function(grid, [](double x) { return std::sin(M_PI * x); });
  const Field zero = Field::zero(grid);
  ChartT<double> chart(
      grid, 1, [carrier](const Params& h) { return carrier.scaled(h[0]); }, {{-2.0, 2.0}},
      [carrier](const Params&, int) { return carrier; },
      [zero](const Params&, int, int) { return zero; },
      [zero](const Params&, int, int, int) { return zero; });

  SpdeProblem problem;
  problem.grid = grid;
  problem.label = "damped_wave";
  problem.interpretation = Interpretation::stratonovich;
  problem.linear_symbol = [gamma](double w) { return -w * w / gamma; };
  problem.linear_nodal = [gamma](const Field& u) { return fd_laplacian(u).scaled(1.0 / gamma); };
  problem.nonlinear = [gamma](const Field& u) {
    return u.pointwise([](double a) { return a * a * a; }).scaled(-4.0 / gamma);
  };
  problem.diffusion_kind = kind;
  problem.noise = (kind == DiffusionKind::pointwise_multiplicative)
                      ? white_noise_truncation(grid, noise_modes)
                      : single_channel_spec(basis_modes(grid, 1)[0]);
  problem.coupling = eps;
  validate_problem(problem);

  ScalarSde strat;
  strat.interpretation = Interpretation::stratonovich;
  strat.drift = [gamma](double h) {
    return -(M_PI * M_PI / gamma) * h - (3.0 / gamma) * h * h * h;
  };
  strat.diffusion = [eps](double h) { return eps * h; };
  strat.diffusion_prime = [eps](double) { return eps; };

  ScalarSde ito = strat;
  ito.interpretation = Interpretation::ito;
  ito.drift = [gamma, eps](double h) {
    return -(M_PI * M_PI / gamma) * h - (3.0 / gamma) * h * h * h + 0.5 * eps * eps * h;
  };

  EnsembleOptions defaults;
  defaults.h0 = 0.1;
  defaults.T = 50.0;
  defaults.dt = 0.01;
  defaults.n_paths = 1000;
  defaults.seed = 1;
  defaults.scheme = Scheme::heun;

  return RealModel{"damped_wave",
                   "overdamped stochastic wave amplitude; sine-mode coordinate",
                   {{"gamma", gamma}, {"eps", eps}, {"n_points", double(n_points)}},
                   grid,
                   std::move(chart),
                   std::move(problem),
                   std::move(strat),
                   std::move(ito),
                   Scheme::heun,
                   12,
                   defaults,
                   std::nullopt,
                   std::nullopt};
}

/// Stochastic Allen-Cahn front on [0, L] with Neumann walls:
///   du = (Laplacian u + u - u^3) dt + eps u o db,
/// kink manifold u^h = tanh((x - h)/sqrt(2)). The reduced drift is the
/// exponentially small wall interaction, shipped as the constant placeholder
/// exp(-sqrt(2) L); the reduced diffusion is the exact finite-domain pairing
///   s(h) = eps <psi_h, u^h> / ||psi_h||^2,  psi_h = d u^h / dh,
/// which vanishes at the domain center by symmetry.
inline RealModel allen_cahn(double length = 20.0, double eps = 0.1,
                            DiffusionKind kind = DiffusionKind::channel_multiplicative,
                            std::size_t n_points = 1024, std::size_t noise_modes = 8) {
  if (!(length >= 10.0)) throw ConfigError("allen_cahn: domain length must be at least 10");
  if (eps < 0.0) throw ConfigError("allen_cahn: eps must be nonnegative");
  const Grid1D grid(0.0, length, n_points, BoundaryCondition::neumann);
  const double r2 = std::sqrt(2.0);

  ChartT<double> chart(
      grid, 1,
      [grid, r2](const Params& h) {
        const double c = h[0];
        return Field::from_function(grid, [c, r2](double x) { return std::tanh((x - c) / r2); });
      },
      {{2.0, length - 2.0}},
      [grid, r2](const Params& h, int) {
        const double c = h[0];
        return Field::from_function(grid, [c, r2](double x) {
          const double s = 1.0 / std::cosh((x - c) / r2);
          return -s * s / r2;
        });
      },
      [grid, r2](const Params& h, int, int) {
        const double c = h[0];
        return Field::from_function(grid, [c, r2](double x) {
          const double xi = (x - c) / r2;
          const double s = 1.0 / std::cosh(xi);
          return -s * s * std::tanh(xi);
        });
      },
      [grid, r2](const Params& h, int, int, int) {
        const double c = h[0];
        return Field::from_function(grid, [c, r2](double x) {
          const double xi = (x - c) / r2;
          const double s2 = 1.0 / (std::cosh(xi) * std::cosh(xi));
          const double t = std::tanh(xi);
          return (s2 * s2 - 2.0 * s2 * t * t) / r2;
        });
      });

  SpdeProblem problem;
  problem.grid = grid;
  problem.label = "allen_cahn";
  problem.interpretation = Interpretation::stratonovich;
  problem.linear_symbol = [](double w) { return -w * w + 1.0; };
  problem.linear_nodal = [](const Field& u) { return fd_laplacian(u) + u; };
  problem.nonlinear = [](const Field& u) {
    return u.pointwise([](double a) { return -a * a * a; });
  };
  problem.diffusion_kind = kind;
  problem.noise = (kind == DiffusionKind::pointwise_multiplicative)
                      ? white_noise_truncation(grid, noise_modes)
                      : single_channel_spec(basis_modes(grid, 1)[0]);
  problem.coupling = eps;
  validate_problem(problem);

  // Exact finite-domain integrals of the kink pairings in terms of
  // xi0 = -h/sqrt(2), xi1 = (L-h)/sqrt(2):
  //   <psi, u^h>   = (tanh^2 xi0 - tanh^2 xi1) / 2
  //   ||psi||^2    = ((t1 - t1^3/3) - (t0 - t0^3/3)) / sqrt(2)
  auto closed_s = [eps, length, r2](double h) {
    const double t0 = std::tanh(-h / r2);
    const double t1 = std::tanh((length - h) / r2);
    const double pairing = 0.5 * (t0 * t0 - t1 * t1);
    const double a = ((t1 - t1 * t1 * t1 / 3.0) - (t0 - t0 * t0 * t0 / 3.0)) / r2;
    return eps * pairing / a;
  };

  ScalarSde strat;
  strat.interpretation = Interpretation::stratonovich;
  const double wall_drift = std::exp(-r2 * length);
  strat.drift = [wall_drift](double) { return wall_drift; };
  strat.diffusion = closed_s;

  ScalarSde ito = strat_to_ito(strat);

  EnsembleOptions defaults;
  defaults.h0 = 0.5 * length;
  defaults.T = 1e4;
  defaults.dt = 0.1;
  defaults.n_paths = 200;
  defaults.seed = 1;
  defaults.scheme = Scheme::heun;

  return RealModel{"allen_cahn",
                   "stochastic Allen-Cahn front; kink-position coordinate",
                   {{"length", length}, {"eps", eps}, {"n_points", double(n_points)}},
                   grid,
                   std::move(chart),
                   std::move(problem),
                   std::move(strat),
                   std::move(ito),
                   Scheme::heun,
                   32,
                   defaults,
                   std::nullopt,
                   std::nullopt};
}

/// Focusing cubic Schrodinger soliton on periodic [-W, W]:
///   du = i (u_xx + |u|^2 u) dt - eps sqrt(4/3) u_x o db,
/// soliton manifold u^h = sqrt(2) sech(x - h) at frozen phase. The
/// Stratonovich position is driftless with diffusion eps sqrt(4/3); the
/// shipped Ito form carries the full noise-induced translation drift
/// (2/3) eps^2 (the scalar chain rule alone gives zero).
inline ComplexModel nls_soliton(double eps = 0.1, double half_width = 20.0,
                                std::size_t n_points = 1024) {
  if (eps < 0.0) throw ConfigError("nls_soliton: eps must be nonnegative");
  if (!(half_width >= 10.0)) throw ConfigError("nls_soliton: half_width must be at least 10");
  using C = std::complex<double>;
  const Grid1D grid(-half_width, half_width, n_points, BoundaryCondition::periodic);
  const double r2 = std::sqrt(2.0);

  ChartT<C> chart(
      grid, 1,
      [grid, r2](const Params& h) {
        const double c = h[0];
        return ComplexField::from_function(grid,
                                           [c, r2](double x) { return C(r2 / std::cosh(x - c), 0.0); });
      },
      {{-12.0, 12.0}},
      [grid, r2](const Params& h, int) {
        const double c = h[0];
        return ComplexField::from_function(grid, [c, r2](double x) {
          const double xi = x - c;
          return C(r2 * std::tanh(xi) / std::cosh(xi), 0.0);
        });
      },
      [grid, r2](const Params& h, int, int) {
        const double c = h[0];
        return ComplexField::from_function(grid, [c, r2](double x) {
          const double s = 1.0 / std::cosh(x - c);
          return C(r2 * s - 2.0 * r2 * s * s * s, 0.0);
        });
      },
      [grid, r2](const Params& h, int, int, int) {
        const double c = h[0];
        return ComplexField::from_function(grid, [c, r2](double x) {
          const double xi = x - c;
          const double s = 1.0 / std::cosh(xi);
          return C(r2 * s * std::tanh(xi) * (1.0 - 6.0 * s * s), 0.0);
        });
      });

  ComplexSpdeProblem problem;
  problem.grid = grid;
  problem.label = "nls_soliton";
  problem.interpretation = Interpretation::stratonovich;
  problem.linear_symbol = [](double w) { return C(0.0, -w * w); };
  problem.linear_nodal = [](const ComplexField& u) { return fd_laplacian(u).scaled(C(0.0, 1.0)); };
  problem.nonlinear = [](const ComplexField& u) {
    return u.pointwise([](C a) { return C(0.0, 1.0) * std::norm(a) * a; });
  };
  problem.diffusion_kind = DiffusionKind::channel_translation;
  const double amp = 1.0 / std::sqrt(grid.length());
  problem.noise = single_channel_spec(
      ComplexField::from_function(grid, [amp](double) { return C(amp, 0.0); }));
  problem.coupling = -eps * std::sqrt(4.0 / 3.0);
  validate_problem(problem);

  const double s_const = eps * std::sqrt(4.0 / 3.0);
  ScalarSde strat;
  strat.interpretation = Interpretation::stratonovich;
  strat.drift = [](double) { return 0.0; };
  strat.diffusion = [s_const](double) { return s_const; };
  strat.diffusion_prime = [](double) { return 0.0; };

  ScalarSde ito = strat;
  ito.interpretation = Interpretation::ito;
  const double translation_drift = (2.0 / 3.0) * eps * eps;
  ito.drift = [translation_drift](double) { return translation_drift; };

  EnsembleOptions defaults;
  defaults.h0 = 0.0;
  defaults.T = 1e3;
  defaults.dt = 0.1;
  defaults.n_paths = 1000;
  defaults.seed = 1;
  defaults.scheme = Scheme::euler_maruyama;

  return ComplexModel{"nls_soliton",
                      "cubic Schrodinger soliton; position coordinate at frozen phase",
                      {{"eps", eps}, {"half_width", half_width}, {"n_points", double(n_points)}},
                      grid,
                      std::move(chart),
                      std::move(problem),
                      std::move(strat),
                      std::move(ito),
                      Scheme::euler_maruyama,
                      129,
                      defaults,
                      std::nullopt,
                      std::nullopt};
}

/// Stochastic Swift-Hohenberg roll amplitude on periodic [0, 16 pi]:
///   du = (-(dxx + 1)^2 u + delta u - 4 u^3) dt + eps u o db,
/// stripe manifold u^h = h cos(x) at frozen phase, reduced form
///   dh = (delta h - 3 h^3) dt + eps h o db.
/// In Ito form the stable amplitude sits at h* = sqrt((delta + eps^2/2)/3)
/// and the noiseless relaxation rate at the fixed point is 2 delta.
inline RealModel swift_hohenberg(double delta = 0.1, double eps = 0.05,
                                 std::size_t n_points = 512) {
  if (!(delta > 0.0)) throw ConfigError("swift_hohenberg: delta must be positive");
  if (eps < 0.0) throw ConfigError("swift_hohenberg: eps must be nonnegative");
  const Grid1D grid(0.0, 16.0 * M_PI, n_points, BoundaryCondition::periodic);

  const Field carrier = Field::from_function(grid, [](double x) { return std::cos(x); });
  const Field zero = Field::zero(grid);
  ChartT<double> chart(
      grid, 1, [carrier](const Params& h) { return carrier.scaled(h[0]); }, {{-1.0, 1.0}},
      [carrier](const Params&, int) { return carrier; },
      [zero](const Params&, int, int) { return zero; },
      [zero](const Params&, int, int, int) { return zero; });

  SpdeProblem problem;
  problem.grid = grid;
  problem.label = "swift_hohenberg";
  problem.interpretation = Interpretation::stratonovich;
  problem.linear_symbol = [delta](double w) {
    const double q = 1.0 - w * w;
    return -q * q + delta;
  };
  // (dxx + 1)^2 evaluated as two passes of (fd_laplacian + id), so the
  // discretization error enters squared on the critical wavenumber.
  problem.linear_nodal = [delta](const Field& u) {
    const Field w1 = fd_laplacian(u) + u;
    const Field w2 = fd_laplacian(w1) + w1;
    return w2.scaled(-1.0).add_scaled(delta, u);
  };
  problem.nonlinear = [](const Field& u) {
    return u.pointwise([](double a) { return -4.0 * a * a * a; });
  };
  problem.diffusion_kind = DiffusionKind::channel_multiplicative;
  problem.noise = single_channel_spec(basis_modes(grid, 1)[0]);
  problem.coupling = eps;
  validate_problem(problem);

  ScalarSde strat;
  strat.interpretation = Interpretation::stratonovich;
  strat.drift = [delta](double h) { return delta * h - 3.0 * h * h * h; };
  strat.diffusion = [eps](double h) { return eps * h; };
  strat.diffusion_prime = [eps](double) { return eps; };

  ScalarSde ito = strat;
  ito.interpretation = Interpretation::ito;
  ito.drift = [delta, eps](double h) {
    return (delta + 0.5 * eps * eps) * h - 3.0 * h * h * h;
  };

  EnsembleOptions defaults;
  defaults.h0 = std::sqrt(delta / 3.0);
  defaults.T = 1e3;
  defaults.dt = 0.1;
  defaults.n_paths = 1000;
  defaults.seed = 1;
  defaults.scheme = Scheme::euler_maruyama;

  return RealModel{"swift_hohenberg",
                   "stochastic Swift-Hohenberg roll amplitude at frozen phase",
                   {{"delta", delta}, {"eps", eps}, {"n_points", double(n_points)}},
                   grid,
                   std::move(chart),
                   std::move(problem),
                   std::move(strat),
                   std::move(ito),
                   Scheme::euler_maruyama,
                   64,
                   defaults,
                   std::sqrt((delta + 0.5 * eps * eps) / 3.0),
                   2.0 * delta};
}

/// Two-parameter stripe chart (amplitude, phase): u = h cos(x - phi).
/// Degenerate at h = 0 where the phase direction collapses.
inline ChartT<double> swift_hohenberg_two_parameter_chart(const Grid1D& grid) {
  auto field = [grid](double a, double b, int mode) {
    // mode 0: a cos(x - b); 1: a sin(x - b); 2: -a cos(x - b); 3: -a sin(x - b)
    return Field::from_function(grid, [a, b, mode](double x) {
      switch (mode) {
        case 0: return a * std::cos(x - b);
        case 1: return a * std::sin(x - b);
        case 2: return -a * std::cos(x - b);
        default: return -a * std::sin(x - b);
      }
    });
  };
  return ChartT<double>(
      grid, 2,
      [field](const Params& h) { return field(h[0], h[1], 0); },
      {{-1.0, 1.0}, {-100.0, 100.0}},
      [field](const Params& h, int j) {
        return j == 0 ? field(1.0, h[1], 0) : field(h[0], h[1], 1);
      },
      [field](const Params& h, int j, int k) {
        if (j == 0 && k == 0) return field(0.0, h[1], 0);
        if (j != k) return field(1.0, h[1], 1);
        return field(h[0], h[1], 2);
      },
      [field](const Params& h, int j, int k, int l) {
        const int order = (j == 1) + (k == 1) + (l == 1);  // phi-derivative count
        switch (order) {
          case 0: return field(0.0, h[1], 0);
          case 1: return field(0.0, h[1], 1);
          case 2: return field(1.0, h[1], 2);
          default: return field(h[0], h[1], 3);
        }
      });
}

/// Metadata row for catalog listings.
struct ModelCard {
  std::string name;
  std::string description;
  std::map<std::string, double> params;
  std::string interpretation;
  std::string default_scheme;
  double h0 = 0.0, T = 0.0, dt = 0.0;
  std::size_t n_paths = 0;
};

template <class Scalar>
ModelCard card_of(const ModelT<Scalar>& m) {
  return {m.name,
          m.description,
          m.params,
          to_string(m.problem.interpretation),
          to_string(m.default_scheme),
          m.defaults.h0,
          m.defaults.T,
          m.defaults.dt,
          m.defaults.n_paths};
}

inline std::vector<ModelCard> model_catalog() {
  return {card_of(damped_wave()), card_of(allen_cahn()), card_of(nls_soliton()),
          card_of(swift_hohenberg())};
}

inline const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"damped_wave", "allen_cahn", "nls_soliton",
                                                 "swift_hohenberg"};
  return names;
}

}  // namespace smr
