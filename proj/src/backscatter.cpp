#include "scatterlab/backscatter.hpp"

#include <algorithm>
#include <sstream>

#include "scatterlab/kernels.hpp"
#include "scatterlab/parallel.hpp"

namespace scatterlab {
namespace {

std::string describe(Vec3 theta, double k) {
  std::ostringstream os;
  os.precision(6);
  os << "theta=(" << theta.x << "," << theta.y << "," << theta.z << "), k=" << k;
  return os.str();
}

}  // namespace

std::vector<Vec3> standard_directions(int n) {
  require(n >= 0, "direction count must be nonnegative");
  static const int lattice[26][3] = {
      {1, 0, 0},  {-1, 0, 0},  {0, 1, 0},   {0, -1, 0},  {0, 0, 1},   {0, 0, -1},  {1, 1, 0},
      {-1, -1, 0}, {1, -1, 0},  {-1, 1, 0},  {1, 0, 1},   {-1, 0, -1}, {1, 0, -1},  {-1, 0, 1},
      {0, 1, 1},  {0, -1, -1}, {0, 1, -1},  {0, -1, 1},  {1, 1, 1},   {-1, -1, -1}, {1, 1, -1},
      {-1, -1, 1}, {1, -1, 1},  {-1, 1, -1}, {-1, 1, 1},  {1, -1, -1}};
  std::vector<Vec3> out;
  if (n <= 26) {
    for (int i = 0; i < n; ++i) {
      Vec3 v{double(lattice[i][0]), double(lattice[i][1]), double(lattice[i][2])};
      out.push_back((1.0 / norm(v)) * v);
    }
    return out;
  }
  const double golden = pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - (2.0 * i + 1.0) / n;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * i;
    out.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return out;
}

std::vector<double> frequency_grid(double kmin, double kmax, double step) {
  require(step > 0.0, "frequency step must be positive");
  require(kmax >= kmin, "kmax must not be below kmin");
  std::vector<double> out;
  long count = static_cast<long>(std::floor((kmax - kmin) / step + 1e-9));
  for (long i = 0; i <= count; ++i) out.push_back(kmin + static_cast<double>(i) * step);
  return out;
}

Born0Backscatter::Born0Backscatter(const gridfield::PotentialRealization& V, const std::vector<Vec3>& directions)
    : V_(&V), dirs_(directions), proj_(directions.size()) {
  const GridSpec3& g = V.grid;
  const int n = g.n_per_axis;
  for (std::size_t d = 0; d < dirs_.size(); ++d) {
    Vec3 t = dirs_[d];
    int nonzero = (t.x != 0.0) + (t.y != 0.0) + (t.z != 0.0);
    double mag = nonzero ? 1.0 / std::sqrt(double(nonzero)) : 0.0;
    auto is_lattice = [mag](double c) { return c == 0.0 || std::abs(std::abs(c) - mag) < 1e-14; };
    Projection& p = proj_[d];
    if (!nonzero || !is_lattice(t.x) || !is_lattice(t.y) || !is_lattice(t.z)) continue;
    int a = (t.x > 0) - (t.x < 0), b = (t.y > 0) - (t.y < 0), c = (t.z > 0) - (t.z < 0);
    double nu = std::sqrt(double(nonzero));
    p.lattice = true;
    p.phase0 = -g.box_half_width * (a + b + c) / nu;
    p.step = g.spacing / nu;
    long qmin = std::min(0, a) * (n - 1L) + std::min(0, b) * (n - 1L) + std::min(0, c) * (n - 1L);
    long qmax = std::max(0, a) * (n - 1L) + std::max(0, b) * (n - 1L) + std::max(0, c) * (n - 1L);
    p.qmin = qmin;
    p.bins.assign(static_cast<std::size_t>(qmax - qmin + 1), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          double v = V.values[g.index(i, j, l)];
          if (v != 0.0) p.bins[static_cast<std::size_t>(long(a) * i + long(b) * j + long(c) * l - qmin)] += v;
        }
  }
}

cdouble Born0Backscatter::operator()(std::size_t direction, cdouble s) const {
  const Projection& p = proj_[direction];
  const GridSpec3& g = V_->grid;
  if (!p.lattice) {
    Vec3 t = dirs_[direction];
    return kernels::born0_sum(g, V_->values, -t, t, s);
  }
  const cdouble two_is = cdouble(0.0, 2.0) * s;
  const cdouble w = std::exp(two_is * p.step);
  cdouble acc = 0.0;
  for (auto it = p.bins.rbegin(); it != p.bins.rend(); ++it) acc = acc * w + *it;
  return acc * std::exp(two_is * (p.phase0 + p.step * static_cast<double>(p.qmin))) * (g.cell_volume / (4.0 * pi));
}

FarFieldDataset born0_sweep(const gridfield::PotentialRealization& V, const std::vector<Vec3>& directions,
                            const std::vector<double>& frequencies) {
  FarFieldDataset ds;
  ds.directions = directions;
  ds.frequencies = frequencies;
  ds.values.assign(directions.size() * frequencies.size(), cdouble(0.0));
  ds.grid = V.grid;
  ds.m = V.m;
  ds.seed = V.seed;
  ds.model = "born0";
  Born0Backscatter b0(V, directions);
  const auto nd = static_cast<int>(directions.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int d = 0; d < nd; ++d) {
    for (std::size_t f = 0; f < frequencies.size(); ++f) ds.at(static_cast<std::size_t>(d), f) = b0(static_cast<std::size_t>(d), frequencies[f]);
  }
  return ds;
}

FarFieldDataset backscatter_sweep(const gridfield::PotentialRealization& V, const std::vector<Vec3>& directions,
                                  const std::vector<double>& frequencies, const forward::SolverOptions& options) {
  require(std::is_sorted(frequencies.begin(), frequencies.end()), "backscatter_sweep: k-grid must be ascending");
  for (double k : frequencies) require(k > 0.0, "backscatter_sweep: frequencies must be positive");
  FarFieldDataset ds;
  ds.directions = directions;
  ds.frequencies = frequencies;
  ds.values.assign(directions.size() * frequencies.size(), cdouble(0.0));
  ds.grid = V.grid;
  ds.m = V.m;
  ds.seed = V.seed;
  ds.tol = options.tol;
  ds.model = "full";
  if (frequencies.empty() || directions.empty()) return ds;

  const double L = options.truncation > 0.0 ? options.truncation : forward::default_truncation(V.grid, V.values);
  const auto nk = static_cast<int>(frequencies.size());
  std::vector<std::string> errors(frequencies.size());
  std::vector<double> estimates(frequencies.size(), 0.0);
  std::vector<int> iterations(frequencies.size(), 0);
  // Frequencies are the parallel unit; nested regions inside the solver run on one thread.
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (int f = 0; f < nk; ++f) {
    auto fu = static_cast<std::size_t>(f);
    double k = frequencies[fu];
    try {
      forward::FreeResolvent r0(V.grid, k, L, options.scheme);
      double est = forward::neumann_norm_estimate(r0, V.values, options.power_iterations);
      estimates[fu] = est;
      if (est >= options.regime_gate) {
        std::ostringstream os;
        os << "k outside the convergent regime (neumann estimate " << est << " >= " << options.regime_gate
           << ") at " << describe(directions.front(), k);
        errors[fu] = os.str();
        continue;
      }
      forward::SolverOptions inner = options;
      inner.power_iterations = 0;
      for (std::size_t d = 0; d < directions.size(); ++d) {
        auto inc = forward::make_incident(directions[d], k);
        try {
          auto sol = forward::solve_lippmann_schwinger(V, inc, r0, inner);
          iterations[fu] = std::max(iterations[fu], sol.report.iterations);
          auto u_inc = forward::incident_field(V.grid, inc);
          for (std::size_t i = 0; i < u_inc.size(); ++i) sol.u_sc.values[i] += u_inc[i];
          ds.at(d, fu) = forward::far_field(V, sol.u_sc, -directions[d], k);
        } catch (const std::exception& e) {
          errors[fu] = std::string(e.what()) + " at " + describe(directions[d], k);
          break;
        }
      }
    } catch (const std::exception& e) {
      errors[fu] = std::string(e.what()) + " at " + describe(directions.front(), k);
    }
  }
  for (std::size_t f = 0; f < errors.size(); ++f) {
    if (!errors[f].empty()) throw NumericalError("backscatter_sweep failed: " + errors[f]);
  }
  ds.max_neumann_estimate = *std::max_element(estimates.begin(), estimates.end());
  ds.max_iterations = *std::max_element(iterations.begin(), iterations.end());
  return ds;
}

}  // namespace scatterlab
