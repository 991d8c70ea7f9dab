#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>

#include "smr/errors.hpp"
#include "smr/reduction.hpp"

namespace smr {

enum class Scheme { euler_maruyama, heun };

inline std::string to_string(Scheme s) {
  return s == Scheme::euler_maruyama ? "euler_maruyama" : "heun";
}

/// Euler-Maruyama is consistent with Ito drift, the Heun predictor-corrector
/// with Stratonovich drift.
inline bool scheme_matches(Scheme s, Interpretation in) {
  return (s == Scheme::euler_maruyama && in == Interpretation::ito) ||
         (s == Scheme::heun && in == Interpretation::stratonovich);
}

inline Scheme scheme_for(Interpretation in) {
  return in == Interpretation::ito ? Scheme::euler_maruyama : Scheme::heun;
}

using VecDrift = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
/// diffusion(state) is the n x m matrix multiplying the m-dimensional
/// Brownian increment.
using VecDiffusion = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

namespace detail {

inline void require_finite(const Eigen::VectorXd& x, const char* where) {
  if (!x.allFinite()) throw DivergenceError(std::string(where) + ": non-finite state", 0.0);
}

}  // namespace detail

/// One Ito Euler-Maruyama step: x + b(x) dt + s(x) dB.
inline Eigen::VectorXd euler_maruyama_step(const VecDrift& drift, const VecDiffusion& diffusion,
                                           const Eigen::VectorXd& state, double dt,
                                           const Eigen::VectorXd& dB) {
  if (!(dt > 0.0)) throw ConfigError("euler_maruyama_step: dt must be positive");
  Eigen::VectorXd next = state + drift(state) * dt + diffusion(state) * dB;
  detail::require_finite(next, "euler_maruyama_step");
  return next;
}

/// One Stratonovich Heun step: predictor p = x + b(x) dt + s(x) dB, then
/// averaged corrector x + (b(x)+b(p))/2 dt + (s(x)+s(p))/2 dB. Averaging the
/// drift as well as the diffusion keeps the zero-noise limit second order.
inline Eigen::VectorXd heun_step(const VecDrift& drift, const VecDiffusion& diffusion,
                                 const Eigen::VectorXd& state, double dt,
                                 const Eigen::VectorXd& dB) {
  if (!(dt > 0.0)) throw ConfigError("heun_step: dt must be positive");
  const Eigen::VectorXd b0 = drift(state);
  const Eigen::MatrixXd s0 = diffusion(state);
  const Eigen::VectorXd predictor = state + b0 * dt + s0 * dB;
  detail::require_finite(predictor, "heun_step predictor");
  Eigen::VectorXd next = state + 0.5 * (b0 + drift(predictor)) * dt +
                         0.5 * (s0 + diffusion(predictor)) * dB;
  detail::require_finite(next, "heun_step");
  return next;
}

/// Scalar fast paths.
inline double euler_maruyama_step(const ScalarSde& sde, double h, double dt, double dB) {
  const double next = h + sde.drift(h) * dt + sde.diffusion(h) * dB;
  if (!std::isfinite(next))
    throw DivergenceError("euler_maruyama_step: non-finite state", 0.0);
  return next;
}

inline double heun_step(const ScalarSde& sde, double h, double dt, double dB) {
  const double b0 = sde.drift(h);
  const double s0 = sde.diffusion(h);
  const double p = h + b0 * dt + s0 * dB;
  const double next = h + 0.5 * (b0 + sde.drift(p)) * dt + 0.5 * (s0 + sde.diffusion(p)) * dB;
  if (!std::isfinite(next)) throw DivergenceError("heun_step: non-finite state", 0.0);
  return next;
}

inline double sde_step(Scheme scheme, const ScalarSde& sde, double h, double dt, double dB) {
  return scheme == Scheme::euler_maruyama ? euler_maruyama_step(sde, h, dt, dB)
                                          : heun_step(sde, h, dt, dB);
}

}  // namespace smr
