#include "scatterlab/grid.hpp"

#include <string>

namespace scatterlab {

GridSpec3 make_grid(int n, double box_half_width) {
  require(n % 2 == 0, "n must be even (got " + std::to_string(n) + ")");
  require(n >= 16, "n must be at least 16 (got " + std::to_string(n) + ")");
  require(box_half_width > 0.0 && std::isfinite(box_half_width), "box half width must be positive");
  GridSpec3 g;
  g.n_per_axis = n;
  g.box_half_width = box_half_width;
  g.spacing = 2.0 * box_half_width / n;
  g.cell_volume = g.spacing * g.spacing * g.spacing;
  return g;
}

Vec3 GridSpec3::node(std::size_t flat) const {
  auto n = static_cast<std::size_t>(n_per_axis);
  int l = static_cast<int>(flat % n);
  int j = static_cast<int>((flat / n) % n);
  int i = static_cast<int>(flat / (n * n));
  return node(i, j, l);
}

int GridSpec3::nearest_index(double x) const {
  double t = (x + box_half_width) / spacing;
  long r = std::lround(t);
  if (r < 0 || r >= n_per_axis) return -1;
  return static_cast<int>(r);
}

}  // namespace scatterlab
