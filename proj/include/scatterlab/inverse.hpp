#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scatterlab/backscatter.hpp"
#include "scatterlab/gridfield.hpp"

namespace scatterlab::inverse {

/// tau_i = i * tau_max / n_tau for i = 1..n_tau.
std::vector<double> tau_grid(int n_tau, double tau_max = 0.45);

/// Frequency step that puts s + tau on grid nodes for every tau of tau_grid: tau_min / 4.
double frequency_step(int n_tau, double tau_max = 0.45);

/// u_inf(-theta, theta, s) linearly interpolated on the frequency grid.
cdouble interpolate(const FarFieldDataset& ds, std::size_t direction, double s);

/// (16 pi^2 / k) int_k^{2k} (2s)^m u(s) conj(u(s + tau)) ds by the trapezoid rule on the
/// dataset nodes, with both band ends and s + tau linearly interpolated.
cdouble band_correlation(const FarFieldDataset& ds, std::size_t direction, double tau, double k);
cdouble band_correlation(const FarFieldDataset& ds, Vec3 theta, double tau, double k);

struct HhatSamples {
  std::vector<double> tau_grid;
  std::vector<Vec3> theta_grid;
  std::vector<cdouble> estimates;  // estimates[t * theta_grid.size() + d], sample point 2 tau theta
  double k_band = 0.0;             // band [k_band, 2 k_band]

  cdouble at(std::size_t t, std::size_t d) const { return estimates[t * theta_grid.size() + d]; }
  cdouble& at(std::size_t t, std::size_t d) { return estimates[t * theta_grid.size() + d]; }
  Vec3 xi(std::size_t t, std::size_t d) const { return (2.0 * tau_grid[t]) * theta_grid[d]; }
};

/// Pairs theta with -theta and averages e(xi) with conj(e(-xi)); directions without a partner get
/// their mirrored sample appended. Afterwards e(-xi) == conj(e(xi)) exactly.
void symmetrize(HhatSamples& hh);

/// band_correlation over the (tau, theta) grid of the first n_theta dataset directions, then
/// symmetrize. band_k = 0 selects the highest band the dataset covers: (f_max - tau_max) / 2.
HhatSamples estimate_hhat(const FarFieldDataset& ds, int n_tau, int n_theta, double band_k = 0.0,
                          double tau_max = 0.45);

struct ReconstructionOptions {
  double xi_step = 0.125;     // Cartesian frequency lattice spacing
  double taper_start = 0.8;   // raised cosine on [taper_start, 1]
  int neighbours = 4;         // inverse-distance interpolation stencil
};

/// Tapered, Hermitian hhat on the Cartesian lattice step * Z^3 restricted to |xi| <= 1.
struct BandSpectrum {
  double step = 0.0;
  int half_side = 0;
  std::vector<cdouble> values;
};

struct ReconstructionResult {
  GridSpec3 grid;
  std::vector<double> h_rec;
  BandSpectrum spectrum;
  double l2_error = -1.0;  // ||h_rec - P_B h|| over R^3; -1 when no reference was given
  double band_K = 0.0;
  double epsilon_sq = 0.0;
  double imaginary_residue = 0.0;  // ||Im|| / ||Re|| before the real part is taken
};

double taper(double rho, const ReconstructionOptions& options = {});

/// Low-pass h from hhat samples: resample to the xi-lattice in |xi| <= 1, taper, inverse transform.
ReconstructionResult reconstruct_strength(const HhatSamples& hh, const GridSpec3& grid,
                                          const BandSpectrum* reference = nullptr,
                                          const ReconstructionOptions& options = {});

/// The lattice spectrum of P_B h for a known hhat.
BandSpectrum band_spectrum(const std::function<cdouble(Vec3)>& hhat, const ReconstructionOptions& options = {});

/// Same transform applied to a known hhat: the band-limited projection P_B h on the grid.
std::vector<double> band_limited_projection(const std::function<cdouble(Vec3)>& hhat, const GridSpec3& grid,
                                            const ReconstructionOptions& options = {});

/// L2(R^3) distance of two band-limited functions by Parseval: (step / 2 pi)^{3/2} ||a - b||.
/// P_B h is not compactly supported, so a norm over the computational box would see only its mean.
double band_l2_distance(const BandSpectrum& a, const BandSpectrum& b = {});

/// sqrt(cell_volume * sum (a - b)^2); b may be empty for ||a||.
double l2_distance(const GridSpec3& grid, const std::vector<double>& a, const std::vector<double>& b = {});

/// int h(x) exp(-i xi.x) dx for a preset strength, by adaptive radial quadrature.
cdouble analytic_hhat(const gridfield::StrengthField& h, Vec3 xi);

/// Band discrepancy (1/k) int_k^{2k} sum_theta w |s^m U(s, theta, tau)|^2 ds, with
/// U = u1(s) conj(u1(s+tau)) - u2(s) conj(u2(s+tau)) and w = 4 pi / n_dir.
double band_discrepancy(const FarFieldDataset& ds1, const FarFieldDataset& ds2, double k, double tau);

/// Discrete sup of band_discrepancy over dataset frequencies in (K0, K] and the tau grid.
double data_discrepancy(const FarFieldDataset& ds1, const FarFieldDataset& ds2, double K0, double K,
                        const std::vector<double>& taus);

/// |ln(C eps^2 + (M0 + K0^{3+4 alpha}) / (K ln|ln eps|)^{beta1})|^{-beta2}, eps = sqrt(eps_sq).
double stability_rhs(double eps_sq, double K0, double K, double M0, double alpha, double beta1, double beta2,
                     double C);

/// beta2 = (2r - 3) / 4 for the a-priori H^r bound.
inline double beta2_from_regularity(double r) { return (2.0 * r - 3.0) / 4.0; }

struct StabilityConfig {
  GridSpec3 grid;
  double m = 3.0;
  gridfield::Preset preset = gridfield::Preset::single_bump;
  double amplitude = 1.0;
  double radius = 0.4;
  double delta = 0.1;  // h2 = h1 + delta * amplitude * single_bump(radius / 2)
  std::vector<double> bands{8.0, 16.0, 32.0};
  double K0 = 4.0;
  int realizations = 50;
  std::uint64_t base_seed = 1;
  int n_dir = 26;
  int n_tau = 8;
  double tau_max = 0.45;
  double success_factor = 0.5;
  std::string model = "born0";
  double solver_tol = 1e-8;
  double C = 1.0, M0 = 1.0, alpha = 0.2, beta1 = 1.0, beta2 = 0.25;
};

struct StabilityRow {
  int realization = 0;
  std::uint64_t seed = 0;
  double K = 0.0;
  double epsilon_sq = 0.0;
  double true_difference = 0.0;      // ||P_B (h1 - h2)||
  double difference_error = 0.0;     // ||(rec1 - rec2) - P_B (h1 - h2)||
  double reconstruction_error = 0.0; // ||rec1 - P_B h1|| / ||P_B h1||
  bool success = false;
  double rhs = -1.0;                 // stability_rhs, -1 when not applicable
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  std::vector<double> bands;
  std::vector<double> success_fraction;
  std::vector<double> median_error;
};

StabilityReport stability_experiment(const StabilityConfig& config);

std::string stability_csv(const StabilityReport& report);

}  // namespace scatterlab::inverse
