#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "smr/errors.hpp"
#include "smr/field.hpp"
#include "smr/noise.hpp"
#include "smr/spectral.hpp"

namespace smr {

/// Literal second-order damped wave system on [0, 1] with Dirichlet walls,
///   u_t = w,
///   w_t = Laplacian(u) - gamma w - 4 u^3 + coupling u dbeta/dt,
/// kept alongside the overdamped scalar problem. Its slow mode relaxes at
/// (gamma - sqrt(gamma^2 - 4 pi^2)) / 2, which for strong damping approaches
/// the overdamped gap pi^2 / gamma.
struct WaveSystemState {
  Eigen::VectorXd u_coefficients;
  Eigen::VectorXd w_coefficients;
  double t = 0.0;
};

class WaveSystemStepper {
 public:
  WaveSystemStepper(Grid1D grid, double gamma, double coupling, int n_modes)
      : gamma_(gamma),
        coupling_(coupling),
        ws_(std::move(grid), n_modes),
        dealias_cut_((2 * n_modes) / 3) {
    if (!(gamma > 0.0)) throw ConfigError("WaveSystemStepper: gamma must be positive");
    lambda_.resize(n_modes);
    for (int k = 0; k < n_modes; ++k) {
      const double w = ws_.wavenumber(k);
      lambda_[k] = w * w;
    }
  }

  const SpectralWorkspaceT<double>& workspace() const { return ws_; }
  double gamma() const { return gamma_; }
  double coupling() const { return coupling_; }

  WaveSystemState init(const FieldT<double>& u0, const FieldT<double>& w0) const {
    return {ws_.project(u0), ws_.project(w0), 0.0};
  }

  /// Semi-implicit step: the linear 2x2 per-mode block is solved exactly for
  /// the implicit pair (u', w'), the cubic and the noise enter explicitly.
  ///   w'(1 + gamma dt + lambda dt^2) = w - lambda dt u + dt N + noise
  ///   u' = u + dt w'
  WaveSystemState step(const WaveSystemState& s, double dt, double dbeta) const {
    if (!(dt > 0.0)) throw ConfigError("WaveSystemStepper::step: dt must be positive");
    if (!s.u_coefficients.allFinite() || !s.w_coefficients.allFinite() ||
        s.u_coefficients.norm() > 1e6 || s.w_coefficients.norm() > 1e6)
      throw DivergenceError("WaveSystemStepper::step: state diverged", s.t);
    const FieldT<double> u = ws_.reconstruct(s.u_coefficients);
    Eigen::VectorXd forcing = ws_.project(u.pointwise([](double x) { return -4.0 * x * x * x; }));
    for (Eigen::Index k = dealias_cut_; k < forcing.size(); ++k) forcing[k] = 0.0;
    const Eigen::VectorXd noise = ws_.project(u.scaled(coupling_)) * dbeta;
    WaveSystemState next;
    next.u_coefficients.resize(s.u_coefficients.size());
    next.w_coefficients.resize(s.w_coefficients.size());
    for (Eigen::Index k = 0; k < s.u_coefficients.size(); ++k) {
      const double lam = lambda_[static_cast<std::size_t>(k)];
      const double denom = 1.0 + gamma_ * dt + lam * dt * dt;
      next.w_coefficients[k] = (s.w_coefficients[k] - lam * dt * s.u_coefficients[k] +
                                dt * forcing[k] + noise[k]) /
                               denom;
      next.u_coefficients[k] = s.u_coefficients[k] + dt * next.w_coefficients[k];
    }
    next.t = s.t + dt;
    return next;
  }

  /// E = 1/2 ||w||^2 + 1/2 ||u_x||^2 + int u^4; decays monotonically without
  /// noise.
  double energy(const WaveSystemState& s) const {
    const FieldT<double> u = ws_.reconstruct(s.u_coefficients);
    const FieldT<double> w = ws_.reconstruct(s.w_coefficients);
    const FieldT<double> ux = fd_derivative(u);
    const FieldT<double> u4 = u.pointwise([](double x) { return x * x * x * x; });
    double quartic = 0.0;
    const auto& g = u.grid();
    for (std::size_t i = 0; i < g.size(); ++i) quartic += g.weight(i) * u4.values()[i];
    return 0.5 * l2_norm_sq(w) + 0.5 * l2_norm_sq(ux) + quartic;
  }

  /// Product-space Fermi decomposition against the manifold {(h sin(pi x), 0)}:
  /// orthogonality only constrains the u component, so h is the sin(pi x)
  /// coefficient of u and v = (u - h u^h, w).
  std::pair<double, double> manifold_coordinates(const WaveSystemState& s) const {
    const FieldT<double> carrier = FieldT<double>::from_function(
        ws_.grid(), [](double x) { return std::sin(M_PI * x); });
    const double norm_sq = l2_norm_sq(carrier);
    const FieldT<double> u = ws_.reconstruct(s.u_coefficients);
    const double h = inner_product(carrier, u) / norm_sq;
    const FieldT<double> vu = u.add_scaled(-h, carrier);
    const double v_norm_sq = l2_norm_sq(vu) + s.w_coefficients.squaredNorm();
    return {h, std::sqrt(v_norm_sq)};
  }

 private:
  double gamma_;
  double coupling_;
  SpectralWorkspaceT<double> ws_;
  std::vector<double> lambda_;
  Eigen::Index dealias_cut_;
};

}  // namespace smr
