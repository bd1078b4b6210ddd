#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scatterlab/forward.hpp"

namespace scatterlab {

/// Backscattered amplitudes u_inf(-theta, theta, k), direction-major.
struct FarFieldDataset {
  std::vector<Vec3> directions;
  std::vector<double> frequencies;
  std::vector<cdouble> values;  // values[d * frequencies.size() + f]
  GridSpec3 grid;
  double m = 3.0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::string model = "full";  // "full" or "born0"
  double max_neumann_estimate = 0.0;
  int max_iterations = 0;

  std::size_t n_dir() const { return directions.size(); }
  std::size_t n_freq() const { return frequencies.size(); }
  cdouble at(std::size_t d, std::size_t f) const { return values[d * frequencies.size() + f]; }
  cdouble& at(std::size_t d, std::size_t f) { return values[d * frequencies.size() + f]; }
};

/// The first n of: 6 axis directions, 12 face diagonals, 8 body diagonals (each followed by its
/// antipode), then Fibonacci-sphere points for n > 26.
std::vector<Vec3> standard_directions(int n);

/// kmin, kmin + step, ... up to kmax (inclusive within 1e-9 step).
std::vector<double> frequency_grid(double kmin, double kmax, double step);

/// Born-0 backscatter u_0(-theta, theta, s) = (1/4pi) sum_y exp(2 i s theta.y) V(y) dV.
/// For lattice directions the potential is binned once onto planes a i + b j + c l = q, so each
/// frequency costs O(n); other directions fall back to the separable direct sum.
class Born0Backscatter {
 public:
  Born0Backscatter(const gridfield::PotentialRealization& V, const std::vector<Vec3>& directions);
  cdouble operator()(std::size_t direction, cdouble s) const;
  std::size_t n_dir() const { return dirs_.size(); }

 private:
  struct Projection {
    bool lattice = false;
    double phase0 = 0.0;  // theta.y at q = 0
    double step = 0.0;    // theta.y increment per unit q
    long qmin = 0;
    std::vector<double> bins;
  };
  const gridfield::PotentialRealization* V_;
  std::vector<Vec3> dirs_;
  std::vector<Projection> proj_;
};

FarFieldDataset born0_sweep(const gridfield::PotentialRealization& V, const std::vector<Vec3>& directions,
                            const std::vector<double>& frequencies);

/// Full Lippmann-Schwinger backscatter sweep, parallel over frequencies. Each frequency builds
/// one resolvent, checks the Neumann gate, then solves all directions in order.
FarFieldDataset backscatter_sweep(const gridfield::PotentialRealization& V, const std::vector<Vec3>& directions,
                                  const std::vector<double>& frequencies,
                                  const forward::SolverOptions& options = {});

}  // namespace scatterlab
