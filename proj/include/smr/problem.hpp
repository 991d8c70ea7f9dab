#pragma once

#include <complex>
#include <functional>
#include <string>
#include <utility>

#include "smr/field.hpp"
#include "smr/grid.hpp"
#include "smr/noise.hpp"

namespace smr {

enum class Interpretation { ito, stratonovich };

inline std::string to_string(Interpretation in) {
  return in == Interpretation::ito ? "ito" : "stratonovich";
}

/// How the noise multiplies the state:
///  - pointwise_multiplicative: G(u) dW = a * u(x) * dW(x), dW a truncated
///    space-time noise field;
///  - channel_multiplicative:   G(u) dW = c * u(x) * db_1, a single scalar
///    Brownian channel scaling the whole state;
///  - channel_translation:      G(u) dW = c * du/dx * db_1, a single scalar
///    channel acting along the translation direction.
enum class DiffusionKind {
  pointwise_multiplicative,
  channel_multiplicative,
  channel_translation
};

inline std::string to_string(DiffusionKind k) {
  switch (k) {
    case DiffusionKind::pointwise_multiplicative: return "pointwise_multiplicative";
    case DiffusionKind::channel_multiplicative: return "channel_multiplicative";
    case DiffusionKind::channel_translation: return "channel_translation";
  }
  return "unknown";
}

/// Evolution problem du = [linear(u) + nonlinear(u)] dt + G(u) dW on one grid.
/// The linear part is carried twice: as a per-mode symbol (for semi-implicit
/// Galerkin stepping) and as a nodal finite-difference operator (for direct
/// evaluation off the mode span). `interpretation` records how the drift is to
/// be read against the noise.
template <class Scalar>
struct SpdeProblemT {
  using FieldType = FieldT<Scalar>;
  using Op = std::function<FieldType(const FieldType&)>;

  Grid1D grid;
  std::string label;
  Interpretation interpretation = Interpretation::stratonovich;

  /// Symbol of the linear part on the Laplacian eigenmode with wavenumber w.
  std::function<Scalar(double)> linear_symbol;
  /// Nodal evaluation of the linear part.
  Op linear_nodal;
  /// Drift minus linear part.
  Op nonlinear;

  DiffusionKind diffusion_kind = DiffusionKind::channel_multiplicative;
  QWienerSpecT<Scalar> noise;
  /// Coupling strength: factor `c` for channel kinds (signed), `a` for the
  /// pointwise kind.
  double coupling = 0.0;

  FieldType drift(const FieldType& u) const { return linear_nodal(u) + nonlinear(u); }

  /// Direction field D(u) of a single-channel coupling: G(u) db = D(u) db_1.
  FieldType channel_direction(const FieldType& u) const {
    switch (diffusion_kind) {
      case DiffusionKind::channel_multiplicative: return u.scaled(Scalar(coupling));
      case DiffusionKind::channel_translation:
        return fd_derivative(u).scaled(Scalar(coupling));
      default:
        throw UnsupportedError("channel_direction: pointwise coupling has no channel");
    }
  }

  /// State increment G(u) dW for one sampled noise increment.
  FieldType apply_G(const FieldType& u, const NoiseIncrementT<Scalar>& inc) const {
    if (diffusion_kind == DiffusionKind::pointwise_multiplicative)
      return u.pointwise_product(inc.as_field).scaled(Scalar(coupling));
    return channel_direction(u).scaled(Scalar(inc.coefficients.at(0)));
  }

  /// Adjoint G(u)* f in noise space, satisfying <G(u)* f, w>_W = Re<f, G(u) w>.
  FieldType apply_G_adjoint(const FieldType& u, const FieldType& f) const {
    require_same_grid(grid, f.grid(), "apply_G_adjoint");
    if (diffusion_kind == DiffusionKind::pointwise_multiplicative) {
      std::vector<Scalar> w(u.size());
      for (std::size_t i = 0; i < u.size(); ++i)
        w[i] = Scalar(coupling * detail::conj_product_re(f[i], u[i]));
      return FieldType(grid, std::move(w));
    }
    const double c = inner_product(f, channel_direction(u));
    return noise.modes.at(0).scaled(Scalar(c));
  }

  /// Drift increment that converts this Stratonovich problem into its
  /// equivalent Ito form: one half of the noise-on-noise derivative summed
  /// over channels.
  FieldType ito_drift_shift(const FieldType& u) const {
    switch (diffusion_kind) {
      case DiffusionKind::channel_multiplicative: {
        const double a1 = noise.amplitudes.at(0);
        return u.scaled(Scalar(0.5 * a1 * a1 * coupling * coupling));
      }
      case DiffusionKind::channel_translation: {
        const double a1 = noise.amplitudes.at(0);
        return fd_laplacian(u).scaled(Scalar(0.5 * a1 * a1 * coupling * coupling));
      }
      case DiffusionKind::pointwise_multiplicative: {
        FieldType acc = FieldType::zero(grid);
        for (std::size_t k = 0; k < noise.dim(); ++k) {
          const double a2 = noise.amplitudes[k] * noise.amplitudes[k];
          acc = acc.add_scaled(Scalar(0.5 * coupling * coupling * a2),
                               u.pointwise_product(noise.modes[k].pointwise_product(
                                   noise.modes[k])));
        }
        return acc;
      }
    }
    throw UnsupportedError("ito_drift_shift: unknown diffusion kind");
  }

  /// The same dynamics rewritten in Ito form. The shift is linear in u, so for
  /// channel kinds it folds into the linear symbol; the pointwise kind gains a
  /// nodal multiplier and keeps its symbol unchanged (the shift joins the
  /// nonlinear part).
  SpdeProblemT ito_effective() const {
    if (interpretation == Interpretation::ito) return *this;
    SpdeProblemT p = *this;
    p.interpretation = Interpretation::ito;
    const double a1 = noise.amplitudes.at(0);
    const double half_c2 = 0.5 * a1 * a1 * coupling * coupling;
    switch (diffusion_kind) {
      case DiffusionKind::channel_multiplicative: {
        auto sym = linear_symbol;
        p.linear_symbol = [sym, half_c2](double w) { return sym(w) + Scalar(half_c2); };
        auto lin = linear_nodal;
        p.linear_nodal = [lin, half_c2](const FieldType& u) {
          return lin(u).add_scaled(Scalar(half_c2), u);
        };
        break;
      }
      case DiffusionKind::channel_translation: {
        auto sym = linear_symbol;
        p.linear_symbol = [sym, half_c2](double w) {
          return sym(w) + Scalar(-half_c2 * w * w);
        };
        auto lin = linear_nodal;
        p.linear_nodal = [lin, half_c2](const FieldType& u) {
          return lin(u).add_scaled(Scalar(half_c2), fd_laplacian(u));
        };
        break;
      }
      case DiffusionKind::pointwise_multiplicative: {
        auto nl = nonlinear;
        auto base = *this;
        p.nonlinear = [nl, base](const FieldType& u) {
          return nl(u) + base.ito_drift_shift(u);
        };
        break;
      }
    }
    return p;
  }
};

using SpdeProblem = SpdeProblemT<double>;
using ComplexSpdeProblem = SpdeProblemT<std::complex<double>>;

template <class Scalar>
void validate_problem(const SpdeProblemT<Scalar>& p) {
  if (!p.linear_symbol || !p.linear_nodal || !p.nonlinear)
    throw ConfigError("SpdeProblem: drift closures are incomplete");
  validate_spec(p.noise);
  require_same_grid(p.grid, p.noise.grid(), "SpdeProblem noise");
  if (p.diffusion_kind != DiffusionKind::pointwise_multiplicative && p.noise.dim() != 1)
    throw ConfigError("SpdeProblem: channel couplings need exactly one noise mode");
}

}  // namespace smr
