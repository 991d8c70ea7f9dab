#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smr/field.hpp"
#include "smr/grid.hpp"

namespace smr {

using Params = Eigen::VectorXd;

enum class DerivativeMode { analytic, finite_difference };

inline std::string to_string(DerivativeMode m) {
  return m == DerivativeMode::analytic ? "analytic" : "finite-difference";
}

/// Parametrized family of manifold states u^h together with its parameter
/// derivatives. Derivative closures are optional; missing orders fall back to
/// central finite differences of the best available lower order (relative step
/// 1e-4 * (1 + |h_j|) for first derivatives, 1e-3 * (1 + |h_j|) for second and
/// third).
template <class Scalar>
class ChartT {
 public:
  using FieldType = FieldT<Scalar>;
  using EvalFn = std::function<FieldType(const Params&)>;
  using D1Fn = std::function<FieldType(const Params&, int)>;
  using D2Fn = std::function<FieldType(const Params&, int, int)>;
  using D3Fn = std::function<FieldType(const Params&, int, int, int)>;

  ChartT(Grid1D grid, int dim, EvalFn eval,
         std::vector<std::pair<double, double>> param_domain, D1Fn d1 = nullptr,
         D2Fn d2 = nullptr, D3Fn d3 = nullptr)
      : grid_(grid),
        dim_(dim),
        eval_(std::move(eval)),
        domain_(std::move(param_domain)),
        d1_(std::move(d1)),
        d2_(std::move(d2)),
        d3_(std::move(d3)) {
    if (dim_ < 1) throw ConfigError("ChartT: dim must be >= 1");
    if (domain_.size() != static_cast<std::size_t>(dim_))
      throw ConfigError("ChartT: param_domain size must equal dim");
  }

  int dim() const { return dim_; }
  const Grid1D& grid() const { return grid_; }
  const std::vector<std::pair<double, double>>& param_domain() const { return domain_; }

  DerivativeMode derivative_mode() const {
    return d1_ ? DerivativeMode::analytic : DerivativeMode::finite_difference;
  }
  bool has_analytic_d1() const { return static_cast<bool>(d1_); }
  bool has_analytic_d2() const { return static_cast<bool>(d2_); }
  bool has_analytic_d3() const { return static_cast<bool>(d3_); }

  bool in_domain(const Params& h) const {
    for (int j = 0; j < dim_; ++j)
      if (h[j] < domain_[j].first || h[j] > domain_[j].second) return false;
    return true;
  }

  FieldType eval(const Params& h) const { return eval_(h); }

  FieldType d1(const Params& h, int j) const {
    if (d1_) return d1_(h, j);
    const double step = 1e-4 * (1.0 + std::abs(h[j]));
    Params hp = h, hm = h;
    hp[j] += step;
    hm[j] -= step;
    return (eval_(hp) - eval_(hm)).scaled(Scalar(1.0 / (2.0 * step)));
  }

  FieldType d2(const Params& h, int j, int k) const {
    if (d2_) return d2_(h, j, k);
    const double step = 1e-3 * (1.0 + std::abs(h[j]));
    Params hp = h, hm = h;
    hp[j] += step;
    hm[j] -= step;
    return (d1(hp, k) - d1(hm, k)).scaled(Scalar(1.0 / (2.0 * step)));
  }

  FieldType d3(const Params& h, int j, int k, int l) const {
    if (d3_) return d3_(h, j, k, l);
    const double step = 1e-3 * (1.0 + std::abs(h[j]));
    Params hp = h, hm = h;
    hp[j] += step;
    hm[j] -= step;
    return (d2(hp, k, l) - d2(hm, k, l)).scaled(Scalar(1.0 / (2.0 * step)));
  }

 private:
  Grid1D grid_;
  int dim_;
  EvalFn eval_;
  std::vector<std::pair<double, double>> domain_;
  D1Fn d1_;
  D2Fn d2_;
  D3Fn d3_;
};

using Chart = ChartT<double>;
using ComplexChart = ChartT<std::complex<double>>;

/// Tangent fields u_j^h = d u^h / dh_j at h.
template <class Scalar>
std::vector<FieldT<Scalar>> tangent_basis(const ChartT<Scalar>& chart, const Params& h) {
  std::vector<FieldT<Scalar>> basis;
  basis.reserve(chart.dim());
  for (int j = 0; j < chart.dim(); ++j) basis.push_back(chart.d1(h, j));
  return basis;
}

/// A_{jk}(h, v) = <u_j^h, u_k^h> - <u_jk^h, v>. With v orthogonal to the
/// tangent space this equals the Hessian of Phi(h) = 0.5 ||u - u^h||^2, and at
/// v = 0 it reduces to the Gram matrix of the tangent basis.
template <class Scalar>
Eigen::MatrixXd assemble_A(const ChartT<Scalar>& chart, const Params& h,
                           const FieldT<Scalar>& v) {
  const int n = chart.dim();
  const auto basis = tangent_basis(chart, h);
  Eigen::MatrixXd A(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      const double gram = inner_product(basis[j], basis[k]);
      const double curv = inner_product(chart.d2(h, j, k), v);
      A(j, k) = gram - curv;
      A(k, j) = A(j, k);
    }
  return A;
}

struct InvertibilityReport {
  bool invertible = false;
  double min_abs_eig = 0.0;
  double max_abs_eig = 0.0;
  double condition_number = 0.0;
  bool positive_definite = false;
};

/// Symmetric-matrix invertibility test: smallest singular value (= smallest
/// |eigenvalue|) must exceed 1e-10 times the largest. Also reports the
/// condition number and definiteness.
inline InvertibilityReport check_invertible(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  const Eigen::VectorXd ev = es.eigenvalues();
  InvertibilityReport r;
  r.min_abs_eig = ev.cwiseAbs().minCoeff();
  r.max_abs_eig = ev.cwiseAbs().maxCoeff();
  r.invertible = r.min_abs_eig > 1e-10 * r.max_abs_eig;
  r.condition_number = r.invertible ? r.max_abs_eig / r.min_abs_eig
                                    : std::numeric_limits<double>::infinity();
  r.positive_definite = ev.minCoeff() > 1e-10 * r.max_abs_eig;
  return r;
}

namespace detail {

inline std::vector<double> to_std(const Params& h) {
  return std::vector<double>(h.data(), h.data() + h.size());
}

}  // namespace detail

/// Solve A x = rhs, raising DegeneracyError at the given parameter point when A
/// fails the invertibility test.
inline Eigen::VectorXd solve_A(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs,
                               const Params& h, const char* where) {
  const auto rep = check_invertible(A);
  if (!rep.invertible)
    throw DegeneracyError(std::string(where) + ": A matrix is numerically singular",
                          detail::to_std(h));
  return A.ldlt().solve(rhs);
}

/// Decomposition u = u^h + v with v orthogonal to the tangent space at h.
/// ortho_residuals holds <u_j^h, v> per parameter at construction time.
template <class Scalar>
struct FermiPairT {
  Params h;
  FieldT<Scalar> v;
  std::vector<double> ortho_residuals;
};

using FermiPair = FermiPairT<double>;

struct ProjectOptions {
  int max_iterations = 100;
  double ortho_tol = 1e-8;
};

/// Largest tangent-orthogonality residual max_j |<u_j^h, v>|.
template <class Scalar>
double ortho_residual(const ChartT<Scalar>& chart, const Params& h, const FieldT<Scalar>& v) {
  double worst = 0.0;
  for (int j = 0; j < chart.dim(); ++j)
    worst = std::max(worst, std::abs(inner_product(chart.d1(h, j), v)));
  return worst;
}

/// Assemble a FermiPair from components, recording the residuals as found.
template <class Scalar>
FermiPairT<Scalar> make_fermi_pair(const ChartT<Scalar>& chart, const Params& h,
                                   FieldT<Scalar> v) {
  std::vector<double> res(chart.dim());
  for (int j = 0; j < chart.dim(); ++j) res[j] = inner_product(chart.d1(h, j), v);
  return {h, std::move(v), std::move(res)};
}

/// Fermi projection: damped Newton iteration on the normal equations
/// <u_j^h, u - u^h> = 0, using the exact Hessian A(h, u - u^h). Returns the
/// minimizer of Phi reached from h_guess.
template <class Scalar>
FermiPairT<Scalar> fermi_project(const ChartT<Scalar>& chart, const FieldT<Scalar>& u,
                                 const Params& h_guess, const ProjectOptions& opts = {}) {
  require_same_grid(chart.grid(), u.grid(), "fermi_project");
  Params h = h_guess;
  const int n = chart.dim();
  auto phi = [&](const Params& p) {
    const FieldT<Scalar> r = u - chart.eval(p);
    return 0.5 * l2_norm_sq(r);
  };
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const FieldT<Scalar> v = u - chart.eval(h);
    Eigen::VectorXd residual(n);
    for (int j = 0; j < n; ++j) residual[j] = inner_product(chart.d1(h, j), v);
    if (residual.cwiseAbs().maxCoeff() <= opts.ortho_tol) {
      std::vector<double> res(residual.data(), residual.data() + n);
      return {h, v, std::move(res)};
    }

    const Eigen::MatrixXd A = assemble_A(chart, h, v);
    if (!check_invertible(A).positive_definite)
      throw DegeneracyError("fermi_project: Hessian lost positive definiteness",
                            detail::to_std(h));
    const Eigen::VectorXd step = solve_A(A, residual, h, "fermi_project");

    // Backtracking on Phi keeps the iteration inside the tube.
    double scale = 1.0;
    const double phi0 = phi(h);
    Params h_next = h + scale * step;
    int halvings = 0;
    while (phi(h_next) > phi0 && halvings < 60) {
      scale *= 0.5;
      h_next = h + scale * step;
      ++halvings;
    }
    h = h_next;
  }
  throw TubeExitError("fermi_project: no convergence within iteration limit", 0.0);
}

}  // namespace smr
