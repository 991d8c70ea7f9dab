#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "smr/field.hpp"
#include "smr/grid.hpp"
#include "smr/modes.hpp"
#include "smr/rng.hpp"

namespace smr {

/// Truncated Q-Wiener process W(t) = sum_k alpha_k B_k(t) e_k with orthonormal
/// modes e_k and independent scalar Brownian motions B_k. The covariance
/// operator acts as Q e_k = alpha_k^2 e_k.
template <class Scalar>
struct QWienerSpecT {
  std::vector<FieldT<Scalar>> modes;
  std::vector<double> amplitudes;

  std::size_t dim() const { return modes.size(); }
  const Grid1D& grid() const { return modes.front().grid(); }
};

using QWienerSpec = QWienerSpecT<double>;

/// Orthonormality defect of the spec's modes: max |<e_j, e_k> - delta_jk|.
template <class Scalar>
double mode_orthonormality_defect(const QWienerSpecT<Scalar>& spec) {
  double worst = 0.0;
  for (std::size_t j = 0; j < spec.dim(); ++j)
    for (std::size_t k = j; k < spec.dim(); ++k) {
      const double g = inner_product(spec.modes[j], spec.modes[k]);
      worst = std::max(worst, std::abs(g - (j == k ? 1.0 : 0.0)));
    }
  return worst;
}

template <class Scalar>
void validate_spec(const QWienerSpecT<Scalar>& spec) {
  if (spec.modes.empty()) throw ConfigError("QWienerSpec: needs at least one mode");
  if (spec.modes.size() != spec.amplitudes.size())
    throw ConfigError("QWienerSpec: amplitude count does not match mode count");
  for (double a : spec.amplitudes)
    if (!(a >= 0.0)) throw ConfigError("QWienerSpec: amplitudes must be nonnegative");
  for (const auto& m : spec.modes) require_same_grid(m.grid(), spec.grid(), "QWienerSpec");
  if (mode_orthonormality_defect(spec) > 1e-8)
    throw ConfigError("QWienerSpec: modes are not orthonormal within 1e-8");
}

/// K-mode truncation of space-time white noise: alpha_k = 1 on the first K
/// Laplacian eigenmodes of the grid.
inline QWienerSpec white_noise_truncation(const Grid1D& grid, std::size_t k_modes) {
  QWienerSpec spec{basis_modes(grid, k_modes), std::vector<double>(k_modes, 1.0)};
  return spec;
}

/// Single-channel noise spec carried by one orthonormal field.
template <class Scalar>
QWienerSpecT<Scalar> single_channel_spec(FieldT<Scalar> carrier, double amplitude = 1.0) {
  QWienerSpecT<Scalar> spec;
  spec.modes.push_back(std::move(carrier));
  spec.amplitudes.assign(1, amplitude);
  return spec;
}

/// One increment of the truncated process over a step dt.
/// coefficients[k] = alpha_k * dB_k ~ N(0, alpha_k^2 dt); as_field is the
/// assembled increment field sum_k coefficients[k] e_k.
template <class Scalar>
struct NoiseIncrementT {
  std::vector<double> coefficients;
  FieldT<Scalar> as_field;
  double dt = 0.0;
};

using NoiseIncrement = NoiseIncrementT<double>;

template <class Scalar>
NoiseIncrementT<Scalar> sample_increment(const QWienerSpecT<Scalar>& spec, double dt,
                                         NoiseStream& stream) {
  if (!(dt > 0.0)) throw ConfigError("sample_increment: dt must be positive");
  NoiseIncrementT<Scalar> inc;
  inc.dt = dt;
  inc.coefficients.resize(spec.dim());
  const double sqrt_dt = std::sqrt(dt);
  for (std::size_t k = 0; k < spec.dim(); ++k)
    inc.coefficients[k] = spec.amplitudes[k] * sqrt_dt * stream.normal();
  FieldT<Scalar> acc = FieldT<Scalar>::zero(spec.grid());
  for (std::size_t k = 0; k < spec.dim(); ++k)
    acc = acc.add_scaled(Scalar(inc.coefficients[k]), spec.modes[k]);
  inc.as_field = std::move(acc);
  return inc;
}

/// Pairing <f, dW> = sum_k coefficients[k] <f, e_k>.
template <class Scalar>
double pair_with_increment(const QWienerSpecT<Scalar>& spec, const FieldT<Scalar>& f,
                           const NoiseIncrementT<Scalar>& inc) {
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.dim(); ++k)
    acc += inc.coefficients[k] * inner_product(f, spec.modes[k]);
  return acc;
}

/// Q f = sum_k alpha_k^2 <e_k, f> e_k.
template <class Scalar>
FieldT<Scalar> apply_Q(const QWienerSpecT<Scalar>& spec, const FieldT<Scalar>& f) {
  require_same_grid(spec.grid(), f.grid(), "apply_Q");
  FieldT<Scalar> acc = FieldT<Scalar>::zero(spec.grid());
  for (std::size_t k = 0; k < spec.dim(); ++k) {
    const double c = spec.amplitudes[k] * spec.amplitudes[k] * inner_product(spec.modes[k], f);
    acc = acc.add_scaled(Scalar(c), spec.modes[k]);
  }
  return acc;
}

/// <f, Q g>, the exact quadratic covariation rate of <f, dW> and <g, dW>.
template <class Scalar>
double q_pairing(const QWienerSpecT<Scalar>& spec, const FieldT<Scalar>& f,
                 const FieldT<Scalar>& g) {
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.dim(); ++k) {
    const double a2 = spec.amplitudes[k] * spec.amplitudes[k];
    acc += a2 * inner_product(f, spec.modes[k]) * inner_product(spec.modes[k], g);
  }
  return acc;
}

struct CovarianceCheckResult {
  double empirical = 0.0;
  double exact = 0.0;
  double stderr_est = 0.0;
  std::size_t n_samples = 0;
};

/// Monte Carlo check of the covariation identity <f,dW><g,dW> = <f, Qg> dt:
/// averages X_i = <f, dW_i><g, dW_i> / dt over n_samples increments and
/// reports the sample standard error.
template <class Scalar>
CovarianceCheckResult covariance_check(const QWienerSpecT<Scalar>& spec, const FieldT<Scalar>& f,
                                       const FieldT<Scalar>& g, std::size_t n_samples, double dt,
                                       NoiseStream& stream) {
  if (n_samples < 2) throw ConfigError("covariance_check: need at least 2 samples");
  // Precompute mode pairings so each sample costs O(K).
  std::vector<double> fk(spec.dim()), gk(spec.dim());
  for (std::size_t k = 0; k < spec.dim(); ++k) {
    fk[k] = inner_product(f, spec.modes[k]);
    gk[k] = inner_product(g, spec.modes[k]);
  }
  const double sqrt_dt = std::sqrt(dt);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    double pf = 0.0, pg = 0.0;
    for (std::size_t k = 0; k < spec.dim(); ++k) {
      const double db = spec.amplitudes[k] * sqrt_dt * stream.normal();
      pf += db * fk[k];
      pg += db * gk[k];
    }
    const double x = pf * pg / dt;
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  CovarianceCheckResult r;
  r.n_samples = n_samples;
  r.empirical = mean;
  r.exact = q_pairing(spec, f, g);
  r.stderr_est = std::sqrt(m2 / static_cast<double>(n_samples - 1) /
                           static_cast<double>(n_samples));
  return r;
}

}  // namespace smr
