#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "scatterlab/grid.hpp"

namespace scatterlab::gridfield {

enum class Preset { single_bump, two_bumps, annulus };

Preset parse_preset(const std::string& name);
std::string preset_name(Preset preset);

/// Nonnegative smooth strength h sampled on the grid. Every preset is supported inside |x| < radius.
struct StrengthField {
  GridSpec3 grid;
  std::vector<double> values;
  Preset preset = Preset::single_bump;
  double amplitude = 0.0;
  double radius = 0.0;
  double sup_bound = 0.0;  // M1

  /// Closed-form value at an arbitrary point (not restricted to nodes).
  double value_at(Vec3 x) const;
};

/// Closed-form preset profile.
double preset_value(Preset preset, double amplitude, double radius, Vec3 x);

StrengthField strength_preset(Preset preset, const GridSpec3& grid, double amplitude, double radius);

/// Field built from explicit node values (used for sums and scaled copies of presets).
StrengthField strength_from_values(const StrengthField& like, std::vector<double> values);

std::vector<double> sample_white_noise(const GridSpec3& grid, std::uint64_t seed);

/// Real inverse DFT of symbol(|xi|) * DFT(noise). The symbol is also evaluated at |xi| = 0.
std::vector<double> apply_radial_filter(std::span<const double> noise, const GridSpec3& grid,
                                        const std::function<double(double)>& symbol);

/// Half-order filter |xi|^{-m/2} with the zero mode removed.
std::vector<double> apply_spectral_filter(std::span<const double> noise, const GridSpec3& grid, double m);

struct PotentialRealization {
  GridSpec3 grid;
  double m = 3.0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::shared_ptr<const StrengthField> strength;
};

inline bool order_in_range(double m) { return m > 14.0 / 5.0 && m < 4.0; }

PotentialRealization synthesize_potential(std::shared_ptr<const StrengthField> strength, double m,
                                          std::uint64_t seed);

/// Deterministic potential with given node values (no strength attached); for tests and probes.
PotentialRealization potential_from_values(const GridSpec3& grid, std::vector<double> values, double m = 3.0);

/// Radial constant c_m of the inverse Fourier transform of |xi|^{-m} in three dimensions:
/// c_m r^{m-3} for m != 3 and c_3 log r for m = 3 (up to additive constants when m >= 3).
double singular_constant(double m);

double kernel_singular_part(const StrengthField& strength, double m, Vec3 x, double r);

struct CovarianceProbe {
  std::vector<double> separations;
  std::vector<double> empirical;
  std::vector<double> standard_error;
  std::vector<double> singular_model;
  double remainder_bound = 0.0;
};

/// Ensemble average of V(x)V(x + r e) over the six axis directions e. x is snapped to the
/// nearest node; every separation must be a whole number of grid spacings.
CovarianceProbe empirical_covariance(std::span<const PotentialRealization> realizations, Vec3 x,
                                     const std::vector<double>& separations);

/// Streaming form of empirical_covariance: realizations are added one at a time.
class CovarianceAccumulator {
 public:
  CovarianceAccumulator(std::shared_ptr<const StrengthField> strength, double m, Vec3 x,
                        std::vector<double> separations);
  void add(const PotentialRealization& v);
  std::size_t count() const { return count_; }
  CovarianceProbe result() const;

 private:
  std::shared_ptr<const StrengthField> strength_;
  double m_;
  std::vector<double> separations_;
  Vec3 node_;
  std::size_t centre_ = 0;
  std::vector<std::array<std::size_t, 6>> neighbours_;
  std::vector<double> sum_, sum2_;
  std::size_t count_ = 0;
};

/// Largest |x| over nodes where the values are nonzero (0 for an all-zero field).
double support_radius(const GridSpec3& grid, std::span<const double> values);

}  // namespace scatterlab::gridfield
