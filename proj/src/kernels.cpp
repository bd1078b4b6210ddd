#include "scatterlab/kernels.hpp"

#include <vector>

#include "scatterlab/parallel.hpp"
#include "scatterlab/rng.hpp"

namespace scatterlab::kernels {
namespace {

std::vector<cdouble> phase_table(const GridSpec3& grid, cdouble factor) {
  std::vector<cdouble> t(static_cast<std::size_t>(grid.n_per_axis));
  for (int i = 0; i < grid.n_per_axis; ++i) t[static_cast<std::size_t>(i)] = std::exp(factor * grid.coord(i));
  return t;
}

// Rows (i, j) are reduced independently and then summed in index order.
template <class Term>
cdouble row_reduce(const GridSpec3& grid, Term&& term) {
  const int n = grid.n_per_axis;
  std::vector<cdouble> rows(static_cast<std::size_t>(n) * n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int row = 0; row < n * n; ++row) {
    int i = row / n, j = row % n;
    cdouble acc = 0.0;
    for (int l = 0; l < n; ++l) acc += term(i, j, l);
    rows[static_cast<std::size_t>(row)] = acc;
  }
  cdouble total = 0.0;
  for (const auto& r : rows) total += r;
  return total;
}

}  // namespace

void white_noise(const GridSpec3& grid, std::uint64_t seed, std::span<double> out) {
  require(out.size() == grid.size(), "white_noise: output size does not match the grid");
  const double scale = 1.0 / std::sqrt(grid.cell_volume);
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = scale * rng::normal(seed, rng::kWhiteNoise, static_cast<std::uint64_t>(i));
  }
}

void multiply(std::span<cdouble> a, std::span<const cdouble> b) {
  require(a.size() == b.size(), "multiply: size mismatch");
  const auto n = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::int64_t i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] *= b[static_cast<std::size_t>(i)];
}

void scale(std::span<cdouble> a, double s) {
  const auto n = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::int64_t i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] *= s;
}

cdouble far_field_sum(const GridSpec3& grid, std::span<const double> weight, std::span<const cdouble> field,
                      Vec3 direction, cdouble k) {
  require(weight.size() == grid.size() && field.size() == grid.size(), "far_field_sum: size mismatch");
  const cdouble mik(0.0, -1.0);
  auto ex = phase_table(grid, mik * k * direction.x);
  auto ey = phase_table(grid, mik * k * direction.y);
  auto ez = phase_table(grid, mik * k * direction.z);
  cdouble total = row_reduce(grid, [&](int i, int j, int l) -> cdouble {
    std::size_t idx = grid.index(i, j, l);
    double w = weight[idx];
    if (w == 0.0) return 0.0;
    return ex[static_cast<std::size_t>(i)] * ey[static_cast<std::size_t>(j)] * ez[static_cast<std::size_t>(l)] *
           (w * field[idx]);
  });
  return total * (grid.cell_volume / (4.0 * pi));
}

cdouble born0_sum(const GridSpec3& grid, std::span<const double> weight, Vec3 x_hat, Vec3 theta, cdouble k) {
  require(weight.size() == grid.size(), "born0_sum: size mismatch");
  Vec3 d = x_hat - theta;
  const cdouble mik(0.0, -1.0);
  auto ex = phase_table(grid, mik * k * d.x);
  auto ey = phase_table(grid, mik * k * d.y);
  auto ez = phase_table(grid, mik * k * d.z);
  cdouble total = row_reduce(grid, [&](int i, int j, int l) -> cdouble {
    double w = weight[grid.index(i, j, l)];
    if (w == 0.0) return 0.0;
    return ex[static_cast<std::size_t>(i)] * ey[static_cast<std::size_t>(j)] * ez[static_cast<std::size_t>(l)] * w;
  });
  return total * (grid.cell_volume / (4.0 * pi));
}

}  // namespace scatterlab::kernels
