#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "tvlab/grid.hpp"

namespace tvlab {

// Shared first-order stencils on a field's grid. Forward differences with a
// zero-past-the-edge convention; the divergence is the exact negative adjoint
// (backward differences), so summation by parts holds with no boundary term
// for compactly supported dual fields.
struct Stencil {
  int dim;
  double h;
  std::array<int, 3> shape;
  std::array<std::size_t, 3> stride;
  std::size_t cells;

  explicit Stencil(const SpaceTimeField& f);

  // Forward-difference gradient of slice u at flat cell `c`.
  std::array<double, 3> gradient(const double* u, std::size_t c) const;
  double gradient_norm(const double* u, std::size_t c) const;

  // Backward-difference divergence of an N-component field stored as
  // comp[a][cell]; exact negative adjoint of `gradient`.
  double divergence(const std::array<const double*, 3>& comp, std::size_t c) const;

  std::array<int, 3> cell_index(std::size_t flat) const;
  bool on_forward_edge(std::size_t flat, int axis) const {
    return cell_index(flat)[axis] + 1 >= shape[axis];
  }
};

// h^N * sum of |grad u| over `cells` (fixed order; bitwise reproducible).
double tv_primal_on_cells(const Stencil& st, const double* u,
                          const std::vector<std::size_t>& cells);

}  // namespace tvlab
