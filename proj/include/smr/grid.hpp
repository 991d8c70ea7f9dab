#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "smr/errors.hpp"

namespace smr {

enum class BoundaryCondition { dirichlet, neumann, periodic };

inline std::string to_string(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::dirichlet: return "dirichlet";
    case BoundaryCondition::neumann: return "neumann";
    case BoundaryCondition::periodic: return "periodic";
  }
  return "unknown";
}

/// Uniform 1-D grid on [x0, x1]. Non-periodic grids include both endpoints;
/// periodic grids exclude x1 (spacing = length / n_points).
class Grid1D {
 public:
  Grid1D() = default;

  Grid1D(double x0, double x1, std::size_t n_points, BoundaryCondition bc)
      : x0_(x0), x1_(x1), n_(n_points), bc_(bc) {
    if (!(x1 > x0)) throw ConfigError("Grid1D: x1 must exceed x0");
    if (n_points < 2) throw ConfigError("Grid1D: need at least 2 points");
    spacing_ = (bc == BoundaryCondition::periodic) ? (x1 - x0) / static_cast<double>(n_)
                                                   : (x1 - x0) / static_cast<double>(n_ - 1);
  }

  double x0() const { return x0_; }
  double x1() const { return x1_; }
  double length() const { return x1_ - x0_; }
  std::size_t size() const { return n_; }
  double spacing() const { return spacing_; }
  BoundaryCondition bc() const { return bc_; }

  double x(std::size_t i) const { return x0_ + spacing_ * static_cast<double>(i); }

  /// Quadrature weight of node i: trapezoid rule for bounded grids,
  /// rectangle rule for periodic grids.
  double weight(std::size_t i) const {
    if (bc_ == BoundaryCondition::periodic) return spacing_;
    return (i == 0 || i + 1 == n_) ? 0.5 * spacing_ : spacing_;
  }

  bool operator==(const Grid1D& o) const {
    return x0_ == o.x0_ && x1_ == o.x1_ && n_ == o.n_ && bc_ == o.bc_;
  }
  bool operator!=(const Grid1D& o) const { return !(*this == o); }

 private:
  double x0_ = 0.0;
  double x1_ = 1.0;
  std::size_t n_ = 2;
  BoundaryCondition bc_ = BoundaryCondition::dirichlet;
  double spacing_ = 1.0;
};

inline void require_same_grid(const Grid1D& a, const Grid1D& b, const char* where) {
  if (a != b) throw GridMismatchError(std::string(where) + ": fields live on different grids");
}

}  // namespace smr
