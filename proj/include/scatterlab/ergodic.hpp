#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scatterlab/backscatter.hpp"

namespace scatterlab::ergodic {

/// The eight real combinations of Z_s = u(s) and Z_{s+tau} = u(s + tau) whose centered squares
/// decompose the centered correlation product.
enum class Component { re_z, im_z, re_zt, im_zt, re_z_minus_re_zt, im_z_minus_im_zt, re_zt_plus_im_z, im_zt_minus_re_z };

inline constexpr std::array<Component, 8> kAllComponents{
    Component::re_z,           Component::im_z,           Component::re_zt,           Component::im_zt,
    Component::re_z_minus_re_zt, Component::im_z_minus_im_zt, Component::re_zt_plus_im_z, Component::im_zt_minus_re_z};

std::string component_name(Component c);
Component parse_component(const std::string& name);
double component_value(Component c, cdouble z, cdouble z_tau);

/// Real samples on the uniform grid s0, s0 + step, ...
struct SampledPath {
  double s0 = 0.0;
  double step = 0.0;
  std::vector<double> values;
  double s_end() const { return values.empty() ? s0 : s0 + step * double(values.size() - 1); }
};

struct BandStatistic {
  double k = 0.0;
  double epsilon = 0.0;
  double value = 0.0;
  Component tag = Component::re_z;
};

inline constexpr double kMaxPathStep = 0.05;

/// k^{eps - 1} int_k^{2k} X_s ds by the trapezoid rule, band ends linearly interpolated.
double band_statistic(const SampledPath& path, double k, double eps);

/// T^{eps - 1} int_0^T X_t dt for a path starting at 0.
double time_average(const SampledPath& path, double T, double eps);

/// X_s = s^m (U_s^2 - mean of U_s^2 over the other realizations) per realization, on the
/// dataset nodes s with s + tau inside the frequency range.
std::vector<SampledPath> centered_square_process(const std::vector<FarFieldDataset>& ensemble, std::size_t direction,
                                                 double tau, Component component);

struct DecayReport {
  std::vector<double> lags;        // in frequency units
  std::vector<double> covariance;  // empirical E(X_s X_{s + lag}) pooled over s
  std::vector<double> standard_error;
  double bound_constant = 0.0;     // smallest C with |cov| <= C / (1 + lag) at every lag
  double fitted_exponent = 0.0;    // slope of log|cov| against log(lag), lags > 0 only
};

/// lag_steps are integer multiples of the path step.
DecayReport covariance_decay_check(const std::vector<SampledPath>& paths, const std::vector<int>& lag_steps);

/// Y_k per realization and k: values[r * k_grid.size() + i].
struct YTable {
  std::vector<double> k_grid;
  std::vector<double> values;
  std::size_t realizations = 0;
  double at(std::size_t r, std::size_t i) const { return values[r * k_grid.size() + i]; }
};

YTable band_statistic_table(const std::vector<SampledPath>& paths, const std::vector<double>& k_grid, double eps);

/// max over the eight components of |Y_k|, per realization and k.
YTable worst_case_table(const std::vector<FarFieldDataset>& ensemble, std::size_t direction, double tau, double eps,
                        const std::vector<double>& k_grid);

/// Fraction of realizations with max_{k >= k_tilde} |Y_k| >= 1.
double exceedance_probability(const YTable& table, double k_tilde);

struct ExceedanceSweep {
  std::vector<double> k_tilde;
  std::vector<double> probability;
  std::vector<double> half_width;  // normal-approximation 95% binomial half width
  double fitted_power = 0.0;       // a in p ~ k_tilde^{-a}, from the points with p > 0
  double bounded_product = 0.0;    // max over the sweep of p k_tilde^a
};

ExceedanceSweep exceedance_sweep(const YTable& table, const std::vector<double>& k_tildes);

/// Stationary Gaussian mixture of Ornstein-Uhlenbeck components with correlation
/// rho(lag) = sum_j w_j exp(-lambda_j lag), approximating (1 + lag)^{-c2}, times the
/// envelope (1 + t)^{c1 / 2}.
struct OuMixture {
  double c1 = 0.0;
  double c2 = 0.9;
  std::vector<double> rates;
  std::vector<double> weights;
  double correlation(double lag) const;
  double covariance(double s, double t) const;
};

OuMixture make_ou_mixture(double c1, double c2, int n_rates = 60, double rate_min = 1e-6, double rate_max = 30.0);

/// One path on [0, t_end] with the given step; path_index separates paths that share a seed.
SampledPath synthetic_ou_path(const OuMixture& mix, double step, double t_end, std::uint64_t seed,
                              std::uint64_t path_index = 0);

std::vector<SampledPath> synthetic_ou_paths(const OuMixture& mix, double step, double t_end, std::uint64_t seed,
                                            int n_paths);

}  // namespace scatterlab::ergodic
