#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "smr/chart.hpp"
#include "smr/problem.hpp"

namespace smr {

/// All reduction quantities at one state u = u^h + v:
///   A_jk   = <u_j, u_k> - <u_jk, v>
///   sigma_j = noise-space fields solving A sigma = [G(u)* u_j]
///   S_kl   = <sigma_k, Q sigma_l>
///   F_j    = sum_k <G(u)* u_jk, Q sigma_k> - sum_kl <u_jk, u_l> S_kl
///   rhs_j  = <u_j, L(u)> + 1/2 sum_kl (<u_jkl, v> - <u_j, u_kl>) S_kl + F_j
///   b      = A^{-1} rhs
template <class Scalar>
struct ReductionTermsT {
  Eigen::MatrixXd A;
  std::vector<FieldT<Scalar>> sigma;
  Eigen::MatrixXd S;
  Eigen::VectorXd F;
  Eigen::VectorXd rhs;
  Eigen::VectorXd b;
};

using ReductionTerms = ReductionTermsT<double>;

/// `drift_override`, when given, replaces problem.drift(u) in the rhs pairing;
/// the coupled stepper uses it to evaluate L(u) through the same Galerkin
/// operators as the full solver.
template <class Scalar>
ReductionTermsT<Scalar> compute_reduction(const SpdeProblemT<Scalar>& problem,
                                          const ChartT<Scalar>& chart, const Params& h,
                                          const FieldT<Scalar>& v,
                                          const FieldT<Scalar>* drift_override = nullptr) {
  require_same_grid(problem.grid, chart.grid(), "compute_reduction");
  require_same_grid(problem.grid, v.grid(), "compute_reduction state");
  if (!chart.in_domain(h))
    throw TubeExitError("compute_reduction: parameter left the chart domain", 0.0);

  const int d = chart.dim();
  const bool v_zero = l2_norm_sq(v) == 0.0;
  const FieldT<Scalar> u = v_zero ? chart.eval(h) : chart.eval(h) + v;

  std::vector<FieldT<Scalar>> d1;
  d1.reserve(d);
  for (int j = 0; j < d; ++j) d1.push_back(chart.d1(h, j));

  std::vector<std::vector<FieldT<Scalar>>> d2(d);
  for (int j = 0; j < d; ++j) {
    d2[j].reserve(d);
    for (int k = 0; k < d; ++k)
      d2[j].push_back(k < j ? d2[k][j] : chart.d2(h, j, k));
  }

  ReductionTermsT<Scalar> out;
  out.A.resize(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = j; k < d; ++k) {
      double a = inner_product(d1[j], d1[k]);
      if (!v_zero) a -= inner_product(d2[j][k], v);
      out.A(j, k) = a;
      out.A(k, j) = a;
    }

  // Noise rows: sigma_j = sum_k (A^{-1})_jk G(u)* u_k.
  std::vector<FieldT<Scalar>> g_rows;
  g_rows.reserve(d);
  for (int j = 0; j < d; ++j) g_rows.push_back(problem.apply_G_adjoint(u, d1[j]));
  Eigen::MatrixXd a_inv;
  {
    const auto rep = check_invertible(out.A);
    if (!rep.invertible)
      throw DegeneracyError("compute_reduction: A matrix is numerically singular",
                            detail::to_std(h));
    a_inv = out.A.ldlt().solve(Eigen::MatrixXd::Identity(d, d));
  }
  out.sigma.reserve(d);
  for (int j = 0; j < d; ++j) {
    FieldT<Scalar> acc = FieldT<Scalar>::zero(problem.grid);
    for (int k = 0; k < d; ++k) acc = acc.add_scaled(Scalar(a_inv(j, k)), g_rows[k]);
    out.sigma.push_back(std::move(acc));
  }

  out.S.resize(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = k; l < d; ++l) {
      const double s = q_pairing(problem.noise, out.sigma[k], out.sigma[l]);
      out.S(k, l) = s;
      out.S(l, k) = s;
    }

  out.F.resize(d);
  for (int j = 0; j < d; ++j) {
    double f = 0.0;
    for (int k = 0; k < d; ++k)
      f += q_pairing(problem.noise, problem.apply_G_adjoint(u, d2[j][k]), out.sigma[k]);
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l)
        f -= inner_product(d2[j][k], d1[l]) * out.S(k, l);
    out.F[j] = f;
  }

  const FieldT<Scalar> lu = drift_override ? *drift_override : problem.drift(u);
  out.rhs.resize(d);
  for (int j = 0; j < d; ++j) {
    double r = inner_product(d1[j], lu);
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        double coupling = -inner_product(d1[j], d2[k][l]);
        if (!v_zero) coupling += inner_product(chart.d3(h, j, k, l), v);
        r += 0.5 * coupling * out.S(k, l);
      }
    out.rhs[j] = r + out.F[j];
  }
  out.b = a_inv * out.rhs;
  return out;
}

/// On-manifold evaluation (v = 0).
template <class Scalar>
ReductionTermsT<Scalar> compute_reduction(const SpdeProblemT<Scalar>& problem,
                                          const ChartT<Scalar>& chart, const Params& h) {
  return compute_reduction(problem, chart, h, FieldT<Scalar>::zero(problem.grid));
}

/// Noise rows alone: sigma_j = sum_k (A^{-1})_jk G(u)* u_k.
template <class Scalar>
std::vector<FieldT<Scalar>> compute_sigma(const SpdeProblemT<Scalar>& problem,
                                          const ChartT<Scalar>& chart, const Params& h,
                                          const FieldT<Scalar>& v) {
  return compute_reduction(problem, chart, h, v).sigma;
}

/// F_j = sum_k <G(u)* u_jk, Q sigma_k> - sum_kl <u_jk, u_l> <sigma_k, Q sigma_l>,
/// for externally supplied sigma rows.
template <class Scalar>
Eigen::VectorXd compute_F(const SpdeProblemT<Scalar>& problem, const ChartT<Scalar>& chart,
                          const Params& h, const FieldT<Scalar>& v,
                          const std::vector<FieldT<Scalar>>& sigma) {
  const int d = chart.dim();
  if (static_cast<int>(sigma.size()) != d)
    throw ConfigError("compute_F: sigma row count does not match chart dim");
  const bool v_zero = l2_norm_sq(v) == 0.0;
  const FieldT<Scalar> u = v_zero ? chart.eval(h) : chart.eval(h) + v;
  std::vector<FieldT<Scalar>> d1;
  d1.reserve(d);
  for (int j = 0; j < d; ++j) d1.push_back(chart.d1(h, j));
  Eigen::MatrixXd S(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = k; l < d; ++l) {
      S(k, l) = q_pairing(problem.noise, sigma[k], sigma[l]);
      S(l, k) = S(k, l);
    }
  Eigen::VectorXd F(d);
  for (int j = 0; j < d; ++j) {
    double f = 0.0;
    for (int k = 0; k < d; ++k) {
      const FieldT<Scalar> djk = chart.d2(h, j, k);
      f += q_pairing(problem.noise, problem.apply_G_adjoint(u, djk), sigma[k]);
      for (int l = 0; l < d; ++l) f -= inner_product(djk, d1[l]) * S(k, l);
    }
    F[j] = f;
  }
  return F;
}

/// Drift alone, for externally supplied sigma rows: solves A b = rhs with
/// rhs_j = <u_j, L(u)> + 1/2 sum_kl (<u_jkl, v> - <u_j, u_kl>) S_kl + F_j.
template <class Scalar>
Eigen::VectorXd compute_drift(const SpdeProblemT<Scalar>& problem, const ChartT<Scalar>& chart,
                              const Params& h, const FieldT<Scalar>& v,
                              const std::vector<FieldT<Scalar>>& sigma) {
  const int d = chart.dim();
  const bool v_zero = l2_norm_sq(v) == 0.0;
  const FieldT<Scalar> u = v_zero ? chart.eval(h) : chart.eval(h) + v;
  const Eigen::MatrixXd A = assemble_A(chart, h, v);
  Eigen::MatrixXd S(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = k; l < d; ++l) {
      S(k, l) = q_pairing(problem.noise, sigma[k], sigma[l]);
      S(l, k) = S(k, l);
    }
  const Eigen::VectorXd F = compute_F(problem, chart, h, v, sigma);
  const FieldT<Scalar> lu = problem.drift(u);
  Eigen::VectorXd rhs(d);
  for (int j = 0; j < d; ++j) {
    double r = inner_product(chart.d1(h, j), lu);
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        double coupling = -inner_product(chart.d1(h, j), chart.d2(h, k, l));
        if (!v_zero) coupling += inner_product(chart.d3(h, j, k, l), v);
        r += 0.5 * coupling * S(k, l);
      }
    rhs[j] = r + F[j];
  }
  return solve_A(A, rhs, h, "compute_drift");
}

/// Scalar SDE dh = b(h) dt + s(h) dB under the stated interpretation.
/// `diffusion_prime` is optional; conversions fall back to a central
/// difference when it is absent.
struct ScalarSde {
  Interpretation interpretation = Interpretation::ito;
  std::function<double(double)> drift;
  std::function<double(double)> diffusion;
  std::function<double(double)> diffusion_prime;
};

inline double diffusion_derivative(const ScalarSde& sde, double h) {
  if (sde.diffusion_prime) return sde.diffusion_prime(h);
  const double step = 1e-5 * (1.0 + std::abs(h));
  return (sde.diffusion(h + step) - sde.diffusion(h - step)) / (2.0 * step);
}

/// Stratonovich -> Ito: b_ito = b + 1/2 s s'. Identity on Ito input.
inline ScalarSde strat_to_ito(const ScalarSde& sde) {
  if (sde.interpretation == Interpretation::ito) return sde;
  ScalarSde out = sde;
  out.interpretation = Interpretation::ito;
  auto b = sde.drift;
  auto s = sde.diffusion;
  ScalarSde base = sde;
  out.drift = [b, s, base](double h) {
    return b(h) + 0.5 * s(h) * diffusion_derivative(base, h);
  };
  return out;
}

/// Reduced SDE dh_j = b_j(h) dt + <sigma_j(h), dW> in full vector form, with
/// an optional registered scalar closed form for one-parameter charts.
template <class Scalar>
struct ReducedSdeT {
  int dim = 1;
  Interpretation interpretation = Interpretation::stratonovich;
  std::function<Eigen::VectorXd(const Params&)> drift;
  std::function<std::vector<FieldT<Scalar>>(const Params&)> diffusion_rows;
  QWienerSpecT<Scalar> noise;
  std::optional<ScalarSde> scalar_form;
};

using ReducedSde = ReducedSdeT<double>;

/// Pipeline-backed reduced system evaluated at v = 0.
template <class Scalar>
ReducedSdeT<Scalar> make_reduced_system(const SpdeProblemT<Scalar>& problem,
                                        const ChartT<Scalar>& chart) {
  ReducedSdeT<Scalar> sde;
  sde.dim = chart.dim();
  sde.interpretation = problem.interpretation;
  sde.noise = problem.noise;
  sde.drift = [problem, chart](const Params& h) {
    return compute_reduction(problem, chart, h).b;
  };
  sde.diffusion_rows = [problem, chart](const Params& h) {
    return compute_reduction(problem, chart, h).sigma;
  };
  return sde;
}

/// Reduce a one-parameter problem to its scalar SDE via the full pipeline at
/// v = 0. For a single noise channel the diffusion keeps the sign of the
/// channel pairing; with several channels only the total rate sqrt(S_11) is
/// meaningful and the scalar form matches in law.
template <class Scalar>
ScalarSde make_reduced_sde(const SpdeProblemT<Scalar>& problem, const ChartT<Scalar>& chart) {
  if (chart.dim() != 1)
    throw UnsupportedError("make_reduced_sde: chart must have exactly one parameter");
  ScalarSde sde;
  sde.interpretation = problem.interpretation;
  sde.drift = [problem, chart](double h) {
    Params p(1);
    p[0] = h;
    return compute_reduction(problem, chart, p).b[0];
  };
  if (problem.noise.dim() == 1) {
    sde.diffusion = [problem, chart](double h) {
      Params p(1);
      p[0] = h;
      const auto terms = compute_reduction(problem, chart, p);
      return problem.noise.amplitudes[0] *
             inner_product(terms.sigma[0], problem.noise.modes[0]);
    };
  } else {
    sde.diffusion = [problem, chart](double h) {
      Params p(1);
      p[0] = h;
      const auto terms = compute_reduction(problem, chart, p);
      return std::sqrt(std::max(terms.S(0, 0), 0.0));
    };
  }
  return sde;
}

}  // namespace smr
