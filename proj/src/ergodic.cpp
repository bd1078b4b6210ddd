#include "scatterlab/ergodic.hpp"

#include <algorithm>
#include <cmath>

#include "scatterlab/inverse.hpp"
#include "scatterlab/parallel.hpp"
#include "scatterlab/rng.hpp"

namespace scatterlab::ergodic {
namespace {

constexpr double kGridTol = 1e-9;

// Integral of the piecewise-linear interpolant of the path over [a, b].
double integrate(const SampledPath& p, double a, double b) {
  auto value_at = [&](double s) {
    double x = (s - p.s0) / p.step;
    auto i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, double(p.values.size() - 1)));
    if (i + 1 >= p.values.size()) return p.values.back();
    double w = x - double(i);
    return (1.0 - w) * p.values[i] + w * p.values[i + 1];
  };
  std::size_t first = static_cast<std::size_t>(std::max(0.0, std::ceil((a - p.s0) / p.step - kGridTol)));
  double acc = 0.0, prev_s = a, prev_v = value_at(a);
  for (std::size_t i = first; i < p.values.size(); ++i) {
    double s = p.s0 + p.step * double(i);
    if (s >= b - kGridTol * p.step) break;
    if (s <= a + kGridTol * p.step) continue;
    acc += 0.5 * (s - prev_s) * (prev_v + p.values[i]);
    prev_s = s;
    prev_v = p.values[i];
  }
  acc += 0.5 * (b - prev_s) * (prev_v + value_at(b));
  return acc;
}

void require_path(const SampledPath& p, double a, double b) {
  require(p.step > 0.0 && p.step <= kMaxPathStep * (1.0 + 1e-12), "path step must lie in (0, 0.05]");
  require(p.values.size() >= 2, "path needs at least two samples");
  require(p.s0 <= a + kGridTol * p.step && p.s_end() >= b - kGridTol * p.step, "path does not cover the band");
}

void require_eps(double eps) { require(eps >= 0.0 && eps < 0.25, "epsilon must lie in [0, 1/4)"); }

}  // namespace

std::string component_name(Component c) {
  switch (c) {
    case Component::re_z: return "re_z";
    case Component::im_z: return "im_z";
    case Component::re_zt: return "re_zt";
    case Component::im_zt: return "im_zt";
    case Component::re_z_minus_re_zt: return "re_z_minus_re_zt";
    case Component::im_z_minus_im_zt: return "im_z_minus_im_zt";
    case Component::re_zt_plus_im_z: return "re_zt_plus_im_z";
    case Component::im_zt_minus_re_z: return "im_zt_minus_re_z";
  }
  return "";
}

Component parse_component(const std::string& name) {
  for (auto c : kAllComponents)
    if (component_name(c) == name) return c;
  throw PreconditionError("unknown component tag '" + name + "'");
}

double component_value(Component c, cdouble z, cdouble zt) {
  switch (c) {
    case Component::re_z: return z.real();
    case Component::im_z: return z.imag();
    case Component::re_zt: return zt.real();
    case Component::im_zt: return zt.imag();
    case Component::re_z_minus_re_zt: return z.real() - zt.real();
    case Component::im_z_minus_im_zt: return z.imag() - zt.imag();
    case Component::re_zt_plus_im_z: return zt.real() + z.imag();
    case Component::im_zt_minus_re_z: return zt.imag() - z.real();
  }
  return 0.0;
}

double band_statistic(const SampledPath& path, double k, double eps) {
  require(k > 0.0, "band statistic needs k > 0");
  require_eps(eps);
  require_path(path, k, 2.0 * k);
  return std::pow(k, eps - 1.0) * integrate(path, k, 2.0 * k);
}

double time_average(const SampledPath& path, double T, double eps) {
  require(T > 0.0, "time average needs T > 0");
  require_eps(eps);
  require(std::abs(path.s0) <= kGridTol, "time average needs a path starting at 0");
  require_path(path, 0.0, T);
  return std::pow(T, eps - 1.0) * integrate(path, 0.0, T);
}

std::vector<SampledPath> centered_square_process(const std::vector<FarFieldDataset>& ensemble, std::size_t direction,
                                                 double tau, Component component) {
  require(ensemble.size() >= 100, "ensemble too small: need at least 100 realizations");
  const auto& f = ensemble.front().frequencies;
  require(f.size() >= 2, "datasets need at least two frequencies");
  require(direction < ensemble.front().n_dir(), "direction index out of range");
  require(tau >= 0.0 && tau < 0.5, "tau must lie in [0, 1/2)");
  const double step = f[1] - f[0];
  for (std::size_t i = 1; i < f.size(); ++i)
    require(std::abs(f[i] - f[i - 1] - step) <= 1e-9 * step, "frequency grid must be uniform");
  for (const auto& ds : ensemble)
    require(ds.frequencies == f && ds.n_dir() == ensemble.front().n_dir() && ds.m == ensemble.front().m,
            "ensemble datasets differ in their grids");
  std::size_t ns = 0;
  while (ns < f.size() && f[ns] + tau <= f.back() + 1e-9 * step) ++ns;
  require(ns >= 2, "tau leaves fewer than two usable frequencies");

  const std::size_t R = ensemble.size();
  const double m = ensemble.front().m;
  std::vector<double> sq(R * ns);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long r = 0; r < static_cast<long>(R); ++r) {
    const auto& ds = ensemble[static_cast<std::size_t>(r)];
    for (std::size_t i = 0; i < ns; ++i) {
      cdouble zt = inverse::interpolate(ds, direction, f[i] + tau);
      double u = component_value(component, ds.at(direction, i), zt);
      sq[static_cast<std::size_t>(r) * ns + i] = u * u;
    }
  }
  std::vector<double> total(ns, 0.0);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t i = 0; i < ns; ++i) total[i] += sq[r * ns + i];
  std::vector<SampledPath> out(R);
  for (std::size_t r = 0; r < R; ++r) {
    out[r].s0 = f[0];
    out[r].step = step;
    out[r].values.resize(ns);
    for (std::size_t i = 0; i < ns; ++i) {
      double v = sq[r * ns + i];
      double others = (total[i] - v) / double(R - 1);
      out[r].values[i] = std::pow(f[i], m) * (v - others);
    }
  }
  return out;
}

DecayReport covariance_decay_check(const std::vector<SampledPath>& paths, const std::vector<int>& lag_steps) {
  require(paths.size() >= 200, "covariance decay check needs at least 200 realizations");
  require(!lag_steps.empty(), "covariance decay check needs at least one lag");
  const std::size_t R = paths.size();
  const std::size_t n = paths.front().values.size();
  for (const auto& p : paths) require(p.values.size() == n, "paths must share one grid");
  DecayReport rep;
  std::vector<double> per(R);
  for (int lag : lag_steps) {
    require(lag >= 0 && static_cast<std::size_t>(lag) < n, "lag exceeds the path length");
    const auto L = static_cast<std::size_t>(lag);
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (long r = 0; r < static_cast<long>(R); ++r) {
      const auto& v = paths[static_cast<std::size_t>(r)].values;
      double acc = 0.0;
      for (std::size_t i = 0; i + L < n; ++i) acc += v[i] * v[i + L];
      per[static_cast<std::size_t>(r)] = acc / double(n - L);
    }
    double mean = 0.0;
    for (double a : per) mean += a;
    mean /= double(R);
    double var = 0.0;
    for (double a : per) var += (a - mean) * (a - mean);
    var /= double(R - 1);
    double lag_s = lag * paths.front().step;
    rep.lags.push_back(lag_s);
    rep.covariance.push_back(mean);
    rep.standard_error.push_back(std::sqrt(var / double(R)));
    rep.bound_constant = std::max(rep.bound_constant, std::abs(mean) * (1.0 + lag_s));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < rep.lags.size(); ++i) {
    if (rep.lags[i] <= 0.0 || rep.covariance[i] == 0.0) continue;
    double x = std::log(rep.lags[i]), y = std::log(std::abs(rep.covariance[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt >= 2 && cnt * sxx - sx * sx > 0.0) rep.fitted_exponent = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return rep;
}

YTable band_statistic_table(const std::vector<SampledPath>& paths, const std::vector<double>& k_grid, double eps) {
  YTable t;
  t.k_grid = k_grid;
  t.realizations = paths.size();
  t.values.resize(paths.size() * k_grid.size());
  const auto R = static_cast<long>(paths.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long r = 0; r < R; ++r)
    for (std::size_t i = 0; i < k_grid.size(); ++i)
      t.values[static_cast<std::size_t>(r) * k_grid.size() + i] =
          band_statistic(paths[static_cast<std::size_t>(r)], k_grid[i], eps);
  return t;
}

YTable worst_case_table(const std::vector<FarFieldDataset>& ensemble, std::size_t direction, double tau, double eps,
                        const std::vector<double>& k_grid) {
  YTable worst;
  for (auto c : kAllComponents) {
    auto t = band_statistic_table(centered_square_process(ensemble, direction, tau, c), k_grid, eps);
    if (worst.values.empty()) {
      worst = t;
      for (auto& v : worst.values) v = std::abs(v);
    } else {
      for (std::size_t i = 0; i < t.values.size(); ++i) worst.values[i] = std::max(worst.values[i], std::abs(t.values[i]));
    }
  }
  return worst;
}

double exceedance_probability(const YTable& table, double k_tilde) {
  require(table.realizations >= 200, "exceedance probability needs at least 200 realizations");
  require(!table.k_grid.empty() && k_tilde >= table.k_grid.front() - 1e-12 && k_tilde <= table.k_grid.back(),
          "k-grid does not cover [k_tilde, k_max]");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < table.realizations; ++r) {
    for (std::size_t i = 0; i < table.k_grid.size(); ++i) {
      if (table.k_grid[i] >= k_tilde - 1e-12 && std::abs(table.at(r, i)) >= 1.0) {
        ++hits;
        break;
      }
    }
  }
  return double(hits) / double(table.realizations);
}

ExceedanceSweep exceedance_sweep(const YTable& table, const std::vector<double>& k_tildes) {
  ExceedanceSweep s;
  s.k_tilde = k_tildes;
  const double n = double(table.realizations);
  for (double kt : k_tildes) {
    double p = exceedance_probability(table, kt);
    s.probability.push_back(p);
    s.half_width.push_back(1.96 * std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < k_tildes.size(); ++i) {
    if (s.probability[i] <= 0.0) continue;
    double x = std::log(k_tildes[i]), y = std::log(s.probability[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt >= 2 && cnt * sxx - sx * sx > 0.0) s.fitted_power = -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  for (std::size_t i = 0; i < k_tildes.size(); ++i)
    s.bounded_product = std::max(s.bounded_product, s.probability[i] * std::pow(k_tildes[i], s.fitted_power));
  return s;
}

double OuMixture::correlation(double lag) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < rates.size(); ++j) acc += weights[j] * std::exp(-rates[j] * std::abs(lag));
  return acc;
}

double OuMixture::covariance(double s, double t) const {
  return std::pow(1.0 + s, 0.5 * c1) * std::pow(1.0 + t, 0.5 * c1) * correlation(t - s);
}

OuMixture make_ou_mixture(double c1, double c2, int n_rates, double rate_min, double rate_max) {
  require(c1 >= 0.0 && 2.0 * c1 < c2 && c2 < 1.0, "synthetic process needs 0 <= 2 c1 < c2 < 1");
  require(n_rates >= 2 && rate_min > 0.0 && rate_max > rate_min, "invalid rate grid");
  // (1 + x)^{-c} = (1 / Gamma(c)) int lambda^{c-1} e^{-lambda} e^{-lambda x} d lambda, trapezoid in log lambda.
  OuMixture mix{c1, c2, {}, {}};
  const double u0 = std::log(rate_min), du = (std::log(rate_max) - u0) / (n_rates - 1);
  const double g = std::tgamma(c2);
  for (int j = 0; j < n_rates; ++j) {
    double lam = std::exp(u0 + j * du);
    double w = std::pow(lam, c2) * std::exp(-lam) / g * du;
    if (j == 0 || j == n_rates - 1) w *= 0.5;
    mix.rates.push_back(lam);
    mix.weights.push_back(w);
  }
  return mix;
}

SampledPath synthetic_ou_path(const OuMixture& mix, double step, double t_end, std::uint64_t seed,
                              std::uint64_t path_index) {
  require(step > 0.0 && t_end > 0.0, "synthetic path needs step > 0 and t_end > 0");
  const auto n = static_cast<std::size_t>(std::ceil(t_end / step - 1e-9)) + 1;
  const std::uint64_t pairs = (n + 1) / 2;
  SampledPath p{0.0, step, std::vector<double>(n, 0.0)};
  const std::size_t nc = mix.rates.size();
  for (std::size_t j = 0; j < nc; ++j) {
    const double a = std::exp(-mix.rates[j] * step);
    const double b = std::sqrt(1.0 - a * a);
    const double amp = std::sqrt(mix.weights[j]);
    const std::uint64_t base = (path_index * nc + j) * pairs;
    std::array<double, 2> z{};
    double x = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      if (t % 2 == 0) z = rng::normal_pair(seed, rng::kOrnsteinUhlenbeck, base + t / 2);
      x = t == 0 ? z[0] : a * x + b * z[t % 2];
      p.values[t] += amp * x;
    }
  }
  if (mix.c1 != 0.0)
    for (std::size_t t = 0; t < n; ++t) p.values[t] *= std::pow(1.0 + step * double(t), 0.5 * mix.c1);
  return p;
}

std::vector<SampledPath> synthetic_ou_paths(const OuMixture& mix, double step, double t_end, std::uint64_t seed,
                                            int n_paths) {
  require(n_paths >= 1, "need at least one path");
  std::vector<SampledPath> out(static_cast<std::size_t>(n_paths));
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (int i = 0; i < n_paths; ++i)
    out[static_cast<std::size_t>(i)] = synthetic_ou_path(mix, step, t_end, seed, static_cast<std::uint64_t>(i));
  return out;
}

}  // namespace scatterlab::ergodic
