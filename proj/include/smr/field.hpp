#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "smr/grid.hpp"

namespace smr {

namespace detail {

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

inline double real_part(double v) { return v; }
inline double real_part(const std::complex<double>& v) { return v.real(); }

inline double conj_product_re(double a, double b) { return a * b; }
inline double conj_product_re(const std::complex<double>& a, const std::complex<double>& b) {
  // Re(a * conj(b))
  return a.real() * b.real() + a.imag() * b.imag();
}

inline double abs_sq(double v) { return v * v; }
inline double abs_sq(const std::complex<double>& v) { return std::norm(v); }

}  // namespace detail

/// Sampled function on a Grid1D. Immutable value type: all arithmetic helpers
/// return new fields.
template <class Scalar>
class FieldT {
 public:
  FieldT() = default;

  FieldT(Grid1D grid, std::vector<Scalar> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw ConfigError("FieldT: value count does not match grid size");
  }

  static FieldT zero(const Grid1D& grid) {
    return FieldT(grid, std::vector<Scalar>(grid.size(), Scalar(0)));
  }

  template <class F>
  static FieldT from_function(const Grid1D& grid, F&& f) {
    std::vector<Scalar> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.x(i));
    return FieldT(grid, std::move(v));
  }

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const Scalar> values() const { return values_; }
  Scalar operator[](std::size_t i) const { return values_[i]; }

  FieldT operator+(const FieldT& o) const {
    require_same_grid(grid_, o.grid_, "Field::operator+");
    std::vector<Scalar> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.values_[i];
    return FieldT(grid_, std::move(v));
  }

  FieldT operator-(const FieldT& o) const {
    require_same_grid(grid_, o.grid_, "Field::operator-");
    std::vector<Scalar> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.values_[i];
    return FieldT(grid_, std::move(v));
  }

  FieldT scaled(Scalar c) const {
    std::vector<Scalar> v(values_);
    for (auto& x : v) x *= c;
    return FieldT(grid_, std::move(v));
  }

  /// this + c * o, in one pass.
  FieldT add_scaled(Scalar c, const FieldT& o) const {
    require_same_grid(grid_, o.grid_, "Field::add_scaled");
    std::vector<Scalar> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += c * o.values_[i];
    return FieldT(grid_, std::move(v));
  }

  FieldT pointwise(const std::function<Scalar(Scalar)>& f) const {
    std::vector<Scalar> v(values_);
    for (auto& x : v) x = f(x);
    return FieldT(grid_, std::move(v));
  }

  FieldT pointwise_product(const FieldT& o) const {
    require_same_grid(grid_, o.grid_, "Field::pointwise_product");
    std::vector<Scalar> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= o.values_[i];
    return FieldT(grid_, std::move(v));
  }

 private:
  Grid1D grid_;
  std::vector<Scalar> values_;
};

using Field = FieldT<double>;
using ComplexField = FieldT<std::complex<double>>;

/// Quadrature approximation of Re ∫ f(x) conj(g(x)) dx. For real fields this is
/// the plain L2 pairing; for complex fields the real part of the Hermitian one.
template <class Scalar>
double inner_product(const FieldT<Scalar>& f, const FieldT<Scalar>& g) {
  require_same_grid(f.grid(), g.grid(), "inner_product");
  const Grid1D& grid = f.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    acc += grid.weight(i) * detail::conj_product_re(f[i], g[i]);
  return acc;
}

template <class Scalar>
double l2_norm_sq(const FieldT<Scalar>& f) {
  const Grid1D& grid = f.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) acc += grid.weight(i) * detail::abs_sq(f[i]);
  return acc;
}

template <class Scalar>
double l2_norm(const FieldT<Scalar>& f) {
  return std::sqrt(l2_norm_sq(f));
}

/// Fourth-order first derivative: 5-point centered stencil in the interior,
/// one-sided 5-point stencils at bounded endpoints, wrapped stencil on
/// periodic grids. Falls back to second order on grids too small for the
/// wide stencils.
template <class Scalar>
FieldT<Scalar> fd_derivative(const FieldT<Scalar>& f) {
  const Grid1D& grid = f.grid();
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  std::vector<Scalar> d(n);
  const bool periodic = grid.bc() == BoundaryCondition::periodic;
  if ((periodic && n >= 5) || (!periodic && n >= 5)) {
    const double s = 1.0 / (12.0 * h);
    auto centered = [&](std::size_t m2, std::size_t m1, std::size_t p1, std::size_t p2) {
      return (f[m2] - 8.0 * f[m1] + 8.0 * f[p1] - f[p2]) * s;
    };
    if (periodic) {
      for (std::size_t i = 0; i < n; ++i)
        d[i] = centered((i + n - 2) % n, (i + n - 1) % n, (i + 1) % n, (i + 2) % n);
    } else {
      d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
      d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
      for (std::size_t i = 2; i + 2 < n; ++i) d[i] = centered(i - 2, i - 1, i + 1, i + 2);
      d[n - 2] = -(-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4] +
                   f[n - 5]) *
                 s;
      d[n - 1] = -(-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4] -
                   3.0 * f[n - 5]) *
                 s;
    }
  } else if (periodic) {
    for (std::size_t i = 0; i < n; ++i)
      d[i] = (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * h);
  } else {
    d[0] = (f[1] - f[0]) / h;
    d[n - 1] = (f[n - 1] - f[n - 2]) / h;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  }
  return FieldT<Scalar>(grid, std::move(d));
}

/// Fourth-order second derivative: 5-point centered stencil in the interior,
/// one-sided 6-point stencils at bounded endpoints, wrapped stencil on
/// periodic grids. Falls back to second order on grids too small for the
/// wide stencils.
template <class Scalar>
FieldT<Scalar> fd_laplacian(const FieldT<Scalar>& f) {
  const Grid1D& grid = f.grid();
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  std::vector<Scalar> d(n);
  const bool periodic = grid.bc() == BoundaryCondition::periodic;
  const double s = 1.0 / (12.0 * h * h);
  if ((periodic && n >= 5) || (!periodic && n >= 6)) {
    auto centered = [&](std::size_t m2, std::size_t m1, std::size_t c, std::size_t p1,
                        std::size_t p2) {
      return (-f[m2] + 16.0 * f[m1] - 30.0 * f[c] + 16.0 * f[p1] - f[p2]) * s;
    };
    if (periodic) {
      for (std::size_t i = 0; i < n; ++i)
        d[i] = centered((i + n - 2) % n, (i + n - 1) % n, i, (i + 1) % n, (i + 2) % n);
    } else {
      d[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] -
              10.0 * f[5]) *
             s;
      d[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) * s;
      for (std::size_t i = 2; i + 2 < n; ++i) d[i] = centered(i - 2, i - 1, i, i + 1, i + 2);
      d[n - 2] = (10.0 * f[n - 1] - 15.0 * f[n - 2] - 4.0 * f[n - 3] + 14.0 * f[n - 4] -
                  6.0 * f[n - 5] + f[n - 6]) *
                 s;
      d[n - 1] = (45.0 * f[n - 1] - 154.0 * f[n - 2] + 214.0 * f[n - 3] - 156.0 * f[n - 4] +
                  61.0 * f[n - 5] - 10.0 * f[n - 6]) *
                 s;
    }
  } else {
    const double s2 = 1.0 / (h * h);
    if (periodic) {
      for (std::size_t i = 0; i < n; ++i)
        d[i] = (f[(i + n - 1) % n] - 2.0 * f[i] + f[(i + 1) % n]) * s2;
    } else {
      if (n < 3) throw ConfigError("fd_laplacian: need at least 3 points");
      d[0] = (f[0] - 2.0 * f[1] + f[2]) * s2;
      d[n - 1] = (f[n - 1] - 2.0 * f[n - 2] + f[n - 3]) * s2;
      for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * s2;
    }
  }
  return FieldT<Scalar>(grid, std::move(d));
}

/// H1 seminorm diagnostic built on fd_derivative.
template <class Scalar>
double h1_seminorm(const FieldT<Scalar>& f) {
  return l2_norm(fd_derivative(f));
}

/// Max |f(x0)|, |f(x1)| for Dirichlet compatibility checks.
inline double boundary_magnitude(const Field& f) {
  return std::max(std::abs(f[0]), std::abs(f[f.size() - 1]));
}

}  // namespace smr
