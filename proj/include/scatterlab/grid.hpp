#pragma once

#include <cstddef>

#include "scatterlab/common.hpp"

namespace scatterlab {

/// Uniform n x n x n lattice on the box [-L, L]^3. Node i sits at -L + i * spacing,
/// so the origin is node n/2 on every axis.
struct GridSpec3 {
  int n_per_axis = 0;
  double box_half_width = 0.0;
  double spacing = 0.0;
  double cell_volume = 0.0;

  std::size_t size() const {
    auto n = static_cast<std::size_t>(n_per_axis);
    return n * n * n;
  }
  std::size_t index(int i, int j, int l) const {
    auto n = static_cast<std::size_t>(n_per_axis);
    return (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) * n +
           static_cast<std::size_t>(l);
  }
  double coord(int i) const { return -box_half_width + i * spacing; }
  Vec3 node(int i, int j, int l) const { return {coord(i), coord(j), coord(l)}; }
  Vec3 node(std::size_t flat) const;

  /// Angular frequency of DFT bin `i` on one axis: (pi / L) * {0, 1, ..., n/2-1, -n/2, ..., -1}.
  double frequency(int i) const {
    int shifted = i < n_per_axis / 2 ? i : i - n_per_axis;
    return pi / box_half_width * shifted;
  }

  /// Nearest lattice index for a coordinate, or -1 when it falls outside the box.
  int nearest_index(double x) const;

  friend bool operator==(const GridSpec3&, const GridSpec3&) = default;
};

GridSpec3 make_grid(int n, double box_half_width);

}  // namespace scatterlab
