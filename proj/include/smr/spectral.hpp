#pragma once

#include <Eigen/Dense>
#include <vector>

#include "smr/field.hpp"
#include "smr/grid.hpp"
#include "smr/modes.hpp"

namespace smr {

/// Precomputed orthonormal eigenmode basis of the Laplacian for one grid,
/// with fast projection / reconstruction between nodal fields and mode
/// coefficients. Works for real and complex fields over the same real basis.
template <class Scalar>
class SpectralWorkspaceT {
 public:
  using VectorType = Eigen::Vector<Scalar, Eigen::Dynamic>;

  SpectralWorkspaceT(const Grid1D& grid, int n_modes)
      : grid_(grid), wavenumbers_(mode_wavenumbers(grid, n_modes)) {
    const auto fields = basis_modes(grid, n_modes);
    const auto n = static_cast<Eigen::Index>(grid.size());
    modes_.resize(n, n_modes);
    weights_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
      weights_[i] = Scalar(grid.weight(static_cast<int>(i)));
    for (int k = 0; k < n_modes; ++k)
      for (Eigen::Index i = 0; i < n; ++i)
        modes_(i, k) = Scalar(fields[k][static_cast<int>(i)]);
  }

  const Grid1D& grid() const { return grid_; }
  int n_modes() const { return static_cast<int>(modes_.cols()); }
  double wavenumber(int k) const { return wavenumbers_[k]; }
  /// Laplacian eigenvalue of mode k (Dirichlet/Neumann/periodic alike).
  double laplacian_symbol(int k) const { return -wavenumbers_[k] * wavenumbers_[k]; }

  /// Mode k as a nodal field.
  FieldT<Scalar> mode_field(int k) const {
    std::vector<Scalar> vals(grid_.size());
    for (std::size_t i = 0; i < vals.size(); ++i)
      vals[i] = modes_(static_cast<Eigen::Index>(i), k);
    return FieldT<Scalar>(grid_, std::move(vals));
  }

  /// Coefficients c_k = <f, e_k> by quadrature.
  VectorType project(const FieldT<Scalar>& f) const {
    require_same_grid(grid_, f.grid(), "SpectralWorkspace::project");
    Eigen::Map<const VectorType> fv(f.values().data(),
                                    static_cast<Eigen::Index>(f.size()));
    return modes_.transpose() * (weights_.asDiagonal() * fv).eval();
  }

  /// Nodal field Sum_k c_k e_k.
  FieldT<Scalar> reconstruct(const VectorType& coeffs) const {
    if (coeffs.size() != modes_.cols())
      throw ConfigError("SpectralWorkspace::reconstruct: coefficient count mismatch");
    VectorType nodal = modes_ * coeffs;
    return FieldT<Scalar>(grid_,
                          std::vector<Scalar>(nodal.data(), nodal.data() + nodal.size()));
  }

  /// Orthogonal projection of f onto the mode span.
  FieldT<Scalar> project_field(const FieldT<Scalar>& f) const {
    return reconstruct(project(f));
  }

 private:
  Grid1D grid_;
  std::vector<double> wavenumbers_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> modes_;
  Eigen::Vector<Scalar, Eigen::Dynamic> weights_;
};

using SpectralWorkspace = SpectralWorkspaceT<double>;
using ComplexSpectralWorkspace = SpectralWorkspaceT<std::complex<double>>;

}  // namespace smr
