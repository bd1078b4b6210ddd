#include "scatterlab/reference.hpp"

#include "scatterlab/rng.hpp"

namespace scatterlab::reference {

void white_noise(const GridSpec3& grid, std::uint64_t seed, std::span<double> out) {
  require(out.size() == grid.size(), "white_noise: output size does not match the grid");
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = rng::normal(seed, rng::kWhiteNoise, i) / std::sqrt(grid.cell_volume);
  }
}

cdouble far_field_sum(const GridSpec3& grid, std::span<const double> weight, std::span<const cdouble> field,
                      Vec3 direction, cdouble k) {
  cdouble acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    acc += std::exp(cdouble(0.0, -1.0) * k * dot(direction, grid.node(i))) * weight[i] * field[i];
  }
  return acc * grid.cell_volume / (4.0 * pi);
}

cdouble outgoing_kernel(cdouble k, double r) { return std::exp(cdouble(0.0, 1.0) * k * r) / (4.0 * pi * r); }

cdouble self_cell_integral(cdouble k, double cell_volume) {
  // int_0^a r exp(ikr) dr for the ball of equal volume
  const double a = std::cbrt(3.0 * cell_volume / (4.0 * pi));
  const cdouble ika = cdouble(0.0, 1.0) * k * a;
  if (std::abs(ika) > 0.5) return (std::exp(ika) * (1.0 - ika) - 1.0) / (k * k);
  cdouble term = 1.0, sum = 0.0;
  for (int j = 0; j < 30; ++j) {
    sum += term / double(j + 2);
    term *= ika / double(j + 1);
  }
  return sum * a * a;
}

std::vector<cdouble> direct_resolvent(const GridSpec3& grid, std::span<const cdouble> f, cdouble k, double L_trunc) {
  std::vector<cdouble> out(grid.size());
  const cdouble self = self_cell_integral(k, grid.cell_volume);
  for (std::size_t x = 0; x < grid.size(); ++x) {
    Vec3 px = grid.node(x);
    cdouble acc = 0.0;
    for (std::size_t y = 0; y < grid.size(); ++y) {
      if (y == x) {
        acc += self * f[y];
        continue;
      }
      double r = norm(px - grid.node(y));
      if (r <= L_trunc) acc += outgoing_kernel(k, r) * f[y] * grid.cell_volume;
    }
    out[x] = acc;
  }
  return out;
}

double lattice_covariance(const GridSpec3& grid, double m, Vec3 z) {
  const int n = grid.n_per_axis;
  double acc = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        Vec3 xi{grid.frequency(a), grid.frequency(b), grid.frequency(c)};
        acc += std::pow(norm(xi), -m) * std::cos(dot(xi, z));
      }
    }
  }
  double vol = std::pow(2.0 * grid.box_half_width, 3);
  return acc / vol;
}

}  // namespace scatterlab::reference
