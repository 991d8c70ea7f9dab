#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "smr/field.hpp"
#include "smr/grid.hpp"

namespace smr {

/// Wavenumber of mode k in the basis returned by basis_modes: the Laplacian
/// acts as multiplication by -wavenumber^2 on that mode.
inline std::vector<double> mode_wavenumbers(const Grid1D& grid, std::size_t count) {
  const double L = grid.length();
  const double pi = std::numbers::pi;
  std::vector<double> w(count);
  switch (grid.bc()) {
    case BoundaryCondition::dirichlet:
      for (std::size_t k = 0; k < count; ++k) w[k] = static_cast<double>(k + 1) * pi / L;
      break;
    case BoundaryCondition::neumann:
      for (std::size_t k = 0; k < count; ++k) w[k] = static_cast<double>(k) * pi / L;
      break;
    case BoundaryCondition::periodic:
      // ordering: constant, cos w1, sin w1, cos w2, sin w2, ...
      for (std::size_t k = 0; k < count; ++k)
        w[k] = 2.0 * pi * static_cast<double>((k + 1) / 2) / L;
      break;
  }
  return w;
}

/// First `count` orthonormal eigenmodes of -d2/dx2 under the grid's boundary
/// condition: sin modes (Dirichlet), constant + cos modes (Neumann), constant +
/// cos/sin pairs (periodic). Requires count <= n_points / 2 so the grid resolves
/// every returned mode.
inline std::vector<Field> basis_modes(const Grid1D& grid, std::size_t count) {
  if (count == 0) throw ConfigError("basis_modes: count must be positive");
  if (count > grid.size() / 2)
    throw ConfigError("basis_modes: count exceeds n_points / 2");
  const double L = grid.length();
  const double x0 = grid.x0();
  const double pi = std::numbers::pi;
  std::vector<Field> modes;
  modes.reserve(count);
  switch (grid.bc()) {
    case BoundaryCondition::dirichlet:
      for (std::size_t k = 1; k <= count; ++k)
        modes.push_back(Field::from_function(grid, [&](double x) {
          return std::sqrt(2.0 / L) * std::sin(static_cast<double>(k) * pi * (x - x0) / L);
        }));
      break;
    case BoundaryCondition::neumann:
      for (std::size_t k = 0; k < count; ++k) {
        if (k == 0) {
          modes.push_back(Field::from_function(grid, [&](double) { return 1.0 / std::sqrt(L); }));
        } else {
          modes.push_back(Field::from_function(grid, [&](double x) {
            return std::sqrt(2.0 / L) * std::cos(static_cast<double>(k) * pi * (x - x0) / L);
          }));
        }
      }
      break;
    case BoundaryCondition::periodic:
      for (std::size_t k = 0; k < count; ++k) {
        if (k == 0) {
          modes.push_back(Field::from_function(grid, [&](double) { return 1.0 / std::sqrt(L); }));
        } else {
          const double freq = 2.0 * pi * static_cast<double>((k + 1) / 2) / L;
          if (k % 2 == 1) {
            modes.push_back(Field::from_function(
                grid, [&](double x) { return std::sqrt(2.0 / L) * std::cos(freq * (x - x0)); }));
          } else {
            modes.push_back(Field::from_function(
                grid, [&](double x) { return std::sqrt(2.0 / L) * std::sin(freq * (x - x0)); }));
          }
        }
      }
      break;
  }
  return modes;
}

}  // namespace smr
