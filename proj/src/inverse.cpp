#include "scatterlab/inverse.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cstdio>
#include <sstream>

#include "scatterlab/parallel.hpp"

namespace scatterlab::inverse {
namespace {

const cdouble I(0.0, 1.0);

bool same_node(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * scale; }

// Band nodes: k, every frequency strictly inside (k, 2k), and 2k.
std::vector<double> band_nodes(const std::vector<double>& freqs, double k) {
  double scale = freqs.size() > 1 ? freqs[1] - freqs[0] : 1.0;
  std::vector<double> nodes{k};
  for (double f : freqs) {
    if (f > k && f < 2.0 * k && !same_node(f, k, scale) && !same_node(f, 2.0 * k, scale)) nodes.push_back(f);
  }
  nodes.push_back(2.0 * k);
  return nodes;
}

void require_band(const FarFieldDataset& ds, double k, double tau) {
  require(k > 0.0, "band frequency k must be positive");
  require(tau >= 0.0 && tau < 0.5, "tau must lie in [0, 1/2)");
  require(!ds.frequencies.empty(), "dataset has no frequencies");
  double scale = ds.frequencies.size() > 1 ? ds.frequencies[1] - ds.frequencies[0] : 1.0;
  require(ds.frequencies.front() <= k + 1e-9 * scale && ds.frequencies.back() >= 2.0 * k + tau - 1e-9 * scale,
          "band [k, 2k + tau] not covered by the dataset frequencies");
}

double bump(double rho) { return std::abs(rho) < 1.0 ? std::exp(-1.0 / (1.0 - rho * rho)) : 0.0; }

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// 4 pi int_0^R profile(r) r^2 sinc(rho r) dr
double radial_transform(const std::function<double(double)>& profile, double r_lo, double r_hi, double rho) {
  auto f = [&](double r) { return profile(r) * r * r * sinc(rho * r); };
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, r_lo, r_hi, 20, 1e-13, &err);
  return 4.0 * pi * v;
}

struct XiLattice {
  int M = 0;
  double step = 0.0;
  std::size_t side() const { return static_cast<std::size_t>(2 * M + 1); }
  std::size_t index(int a, int b, int c) const {
    return (static_cast<std::size_t>(a + M) * side() + static_cast<std::size_t>(b + M)) * side() +
           static_cast<std::size_t>(c + M);
  }
};

XiLattice make_lattice(const ReconstructionOptions& o) {
  require(o.xi_step > 0.0 && o.xi_step <= 0.5, "xi_step must lie in (0, 0.5]");
  return {static_cast<int>(std::floor(1.0 / o.xi_step + 1e-9)), o.xi_step};
}

bool upper_half(int a, int b, int c) { return a > 0 || (a == 0 && (b > 0 || (b == 0 && c > 0))); }

// Fills the lattice from values on the upper half space and the origin; the rest by conjugation.
template <class Value>
std::vector<cdouble> hermitian_lattice(const XiLattice& lat, const ReconstructionOptions& o, Value&& value) {
  std::vector<cdouble> g(lat.side() * lat.side() * lat.side(), cdouble(0.0));
  for (int a = -lat.M; a <= lat.M; ++a)
    for (int b = -lat.M; b <= lat.M; ++b)
      for (int c = -lat.M; c <= lat.M; ++c) {
        bool origin = a == 0 && b == 0 && c == 0;
        if (!origin && !upper_half(a, b, c)) continue;
        Vec3 xi{a * lat.step, b * lat.step, c * lat.step};
        double rho = norm(xi);
        double w = taper(rho, o);
        if (w == 0.0) continue;
        cdouble v = w * value(xi);
        if (origin) {
          g[lat.index(0, 0, 0)] = v.real();
        } else {
          g[lat.index(a, b, c)] = v;
          g[lat.index(-a, -b, -c)] = std::conj(v);
        }
      }
  return g;
}

// (step^3 / (2 pi)^3) sum_xi g(xi) exp(i xi.x) on the grid, separably.
std::vector<cdouble> lattice_transform(const XiLattice& lat, const std::vector<cdouble>& g, const GridSpec3& grid) {
  const int n = grid.n_per_axis;
  const std::size_t S = lat.side(), N = static_cast<std::size_t>(n);
  std::vector<cdouble> e(S * N);
  for (int a = -lat.M; a <= lat.M; ++a)
    for (int i = 0; i < n; ++i)
      e[static_cast<std::size_t>(a + lat.M) * N + static_cast<std::size_t>(i)] =
          std::exp(I * (a * lat.step) * grid.coord(i));
  std::vector<cdouble> t1(S * S * N, cdouble(0.0));
  for (std::size_t a = 0; a < S; ++a)
    for (std::size_t b = 0; b < S; ++b)
      for (std::size_t c = 0; c < S; ++c) {
        cdouble v = g[(a * S + b) * S + c];
        if (v == cdouble(0.0)) continue;
        for (std::size_t l = 0; l < N; ++l) t1[(a * S + b) * N + l] += v * e[c * N + l];
      }
  std::vector<cdouble> t2(S * N * N, cdouble(0.0));
  for (std::size_t a = 0; a < S; ++a)
    for (std::size_t b = 0; b < S; ++b)
      for (std::size_t j = 0; j < N; ++j) {
        cdouble eb = e[b * N + j];
        for (std::size_t l = 0; l < N; ++l) t2[(a * N + j) * N + l] += t1[(a * S + b) * N + l] * eb;
      }
  std::vector<cdouble> out(grid.size());
  const double scale = std::pow(lat.step / (2.0 * pi), 3);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t l = 0; l < N; ++l) {
        cdouble acc = 0.0;
        for (std::size_t a = 0; a < S; ++a) acc += t2[(a * N + j) * N + l] * e[a * N + static_cast<std::size_t>(i)];
        out[grid.index(i, static_cast<int>(j), static_cast<int>(l))] = acc * scale;
      }
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<double> tau_grid(int n_tau, double tau_max) {
  require(n_tau >= 1, "tau grid needs at least one point");
  require(tau_max > 0.0 && tau_max < 0.5, "tau_max must lie in (0, 1/2)");
  std::vector<double> t;
  for (int i = 1; i <= n_tau; ++i) t.push_back(i * tau_max / n_tau);
  return t;
}

double frequency_step(int n_tau, double tau_max) { return tau_max / n_tau / 4.0; }

cdouble interpolate(const FarFieldDataset& ds, std::size_t direction, double s) {
  const auto& f = ds.frequencies;
  require(!f.empty(), "dataset has no frequencies");
  double scale = f.size() > 1 ? f[1] - f[0] : 1.0;
  require(s >= f.front() - 1e-9 * scale && s <= f.back() + 1e-9 * scale, "frequency outside the dataset range");
  auto it = std::lower_bound(f.begin(), f.end(), s);
  if (it == f.end()) return ds.at(direction, f.size() - 1);
  auto hi = static_cast<std::size_t>(it - f.begin());
  if (same_node(f[hi], s, scale) || hi == 0) return ds.at(direction, hi);
  std::size_t lo = hi - 1;
  if (same_node(f[lo], s, scale)) return ds.at(direction, lo);
  double w = (s - f[lo]) / (f[hi] - f[lo]);
  return (1.0 - w) * ds.at(direction, lo) + w * ds.at(direction, hi);
}

cdouble band_correlation(const FarFieldDataset& ds, std::size_t direction, double tau, double k) {
  require(direction < ds.n_dir(), "direction index out of range");
  require_band(ds, k, tau);
  auto nodes = band_nodes(ds.frequencies, k);
  auto integrand = [&](double s) {
    return std::pow(2.0 * s, ds.m) * interpolate(ds, direction, s) * std::conj(interpolate(ds, direction, s + tau));
  };
  cdouble acc = 0.0;
  cdouble prev = integrand(nodes[0]);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    cdouble cur = integrand(nodes[i]);
    acc += 0.5 * (nodes[i] - nodes[i - 1]) * (prev + cur);
    prev = cur;
  }
  return 16.0 * pi * pi / k * acc;
}

cdouble band_correlation(const FarFieldDataset& ds, Vec3 theta, double tau, double k) {
  for (std::size_t d = 0; d < ds.n_dir(); ++d) {
    if (norm(ds.directions[d] - theta) < 1e-12) return band_correlation(ds, d, tau, k);
  }
  throw PreconditionError("direction not present in the dataset");
}

void symmetrize(HhatSamples& hh) {
  const std::size_t nt = hh.tau_grid.size();
  std::vector<Vec3> dirs = hh.theta_grid;
  std::vector<long> partner(dirs.size(), -1);
  for (std::size_t d = 0; d < dirs.size(); ++d)
    for (std::size_t p = 0; p < dirs.size(); ++p)
      if (p != d && norm(dirs[d] + dirs[p]) < 1e-12) partner[d] = static_cast<long>(p);
  std::vector<std::size_t> lonely;
  for (std::size_t d = 0; d < dirs.size(); ++d)
    if (partner[d] < 0) lonely.push_back(d);
  std::vector<Vec3> out_dirs = dirs;
  for (auto d : lonely) out_dirs.push_back(-dirs[d]);
  std::vector<cdouble> out(nt * out_dirs.size());
  const std::size_t nd = out_dirs.size();
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      long p = partner[d];
      if (p < 0) {
        out[t * nd + d] = hh.at(t, d);
      } else if (static_cast<std::size_t>(p) > d) {
        cdouble avg = 0.5 * (hh.at(t, d) + std::conj(hh.at(t, static_cast<std::size_t>(p))));
        out[t * nd + d] = avg;
        out[t * nd + static_cast<std::size_t>(p)] = std::conj(avg);
      }
    }
    for (std::size_t i = 0; i < lonely.size(); ++i) out[t * nd + dirs.size() + i] = std::conj(hh.at(t, lonely[i]));
  }
  hh.theta_grid = std::move(out_dirs);
  hh.estimates = std::move(out);
}

HhatSamples estimate_hhat(const FarFieldDataset& ds, int n_tau, int n_theta, double band_k, double tau_max) {
  require(n_tau >= 4, "grid too coarse: n_tau must be at least 4");
  require(n_theta >= 6, "grid too coarse: n_theta must be at least 6");
  require(static_cast<std::size_t>(n_theta) <= ds.n_dir(), "n_theta exceeds the dataset direction count");
  HhatSamples hh;
  hh.tau_grid = tau_grid(n_tau, tau_max);
  hh.theta_grid.assign(ds.directions.begin(), ds.directions.begin() + n_theta);
  double top = (ds.frequencies.back() - hh.tau_grid.back()) / 2.0;
  hh.k_band = band_k > 0.0 ? band_k : top;
  require_band(ds, hh.k_band, hh.tau_grid.back());
  hh.estimates.assign(hh.tau_grid.size() * hh.theta_grid.size(), cdouble(0.0));
  const int total = n_tau * n_theta;
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int job = 0; job < total; ++job) {
    auto t = static_cast<std::size_t>(job / n_theta), d = static_cast<std::size_t>(job % n_theta);
    hh.at(t, d) = band_correlation(ds, d, hh.tau_grid[t], hh.k_band);
  }
  symmetrize(hh);
  return hh;
}

double taper(double rho, const ReconstructionOptions& o) {
  if (rho <= o.taper_start) return 1.0;
  if (rho >= 1.0) return rho > 1.0 + 1e-12 ? 0.0 : 0.0;
  return 0.5 * (1.0 + std::cos(pi * (rho - o.taper_start) / (1.0 - o.taper_start)));
}

ReconstructionResult reconstruct_strength(const HhatSamples& hh, const GridSpec3& grid,
                                          const BandSpectrum* reference, const ReconstructionOptions& o) {
  const std::size_t nt = hh.tau_grid.size(), nd = hh.theta_grid.size();
  require(hh.estimates.size() == nt * nd, "hhat samples are inconsistent");
  std::vector<Vec3> pts;
  std::vector<cdouble> vals;
  double reach = 0.0;
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t d = 0; d < nd; ++d) {
      pts.push_back(hh.xi(t, d));
      vals.push_back(hh.at(t, d));
      reach = std::max(reach, norm(pts.back()));
    }
  require(pts.size() >= static_cast<std::size_t>(o.neighbours) && reach >= 0.75,
          "insufficient xi coverage: samples must reach |xi| >= 0.75");
  XiLattice lat = make_lattice(o);
  const std::size_t K = static_cast<std::size_t>(o.neighbours);
  auto g = hermitian_lattice(lat, o, [&](Vec3 xi) -> cdouble {
    std::vector<std::pair<double, std::size_t>> dist(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) dist[i] = {norm(pts[i] - xi), i};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(K), dist.end());
    if (dist[0].first < 1e-12) return vals[dist[0].second];
    cdouble num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      double w = 1.0 / (dist[i].first * dist[i].first);
      num += w * vals[dist[i].second];
      den += w;
    }
    return num / den;
  });
  auto field = lattice_transform(lat, g, grid);
  ReconstructionResult r;
  r.spectrum = {lat.step, lat.M, std::move(g)};
  r.grid = grid;
  r.band_K = hh.k_band;
  r.h_rec.resize(field.size());
  double re2 = 0.0, im2 = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    r.h_rec[i] = field[i].real();
    re2 += field[i].real() * field[i].real();
    im2 += field[i].imag() * field[i].imag();
  }
  r.imaginary_residue = re2 > 0.0 ? std::sqrt(im2 / re2) : std::sqrt(im2);
  if (reference) r.l2_error = band_l2_distance(r.spectrum, *reference);
  return r;
}

BandSpectrum band_spectrum(const std::function<cdouble(Vec3)>& hhat, const ReconstructionOptions& o) {
  XiLattice lat = make_lattice(o);
  return {lat.step, lat.M, hermitian_lattice(lat, o, hhat)};
}

std::vector<double> band_limited_projection(const std::function<cdouble(Vec3)>& hhat, const GridSpec3& grid,
                                            const ReconstructionOptions& o) {
  XiLattice lat = make_lattice(o);
  auto g = hermitian_lattice(lat, o, hhat);
  auto field = lattice_transform(lat, g, grid);
  std::vector<double> out(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = field[i].real();
  return out;
}

double band_l2_distance(const BandSpectrum& a, const BandSpectrum& b) {
  require(b.values.empty() || (a.step == b.step && a.half_side == b.half_side && a.values.size() == b.values.size()),
          "band spectra live on different lattices");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::norm(b.values.empty() ? a.values[i] : a.values[i] - b.values[i]);
  return std::pow(a.step / (2.0 * pi), 1.5) * std::sqrt(s);
}

double l2_distance(const GridSpec3& grid, const std::vector<double>& a, const std::vector<double>& b) {
  require(b.empty() || a.size() == b.size(), "l2_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = b.empty() ? a[i] : a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc * grid.cell_volume);
}

cdouble analytic_hhat(const gridfield::StrengthField& h, Vec3 xi) {
  const double A = h.amplitude, R = h.radius, rho = norm(xi);
  switch (h.preset) {
    case gridfield::Preset::single_bump:
      return A * radial_transform([R](double r) { return bump(r / R); }, 0.0, R, rho);
    case gridfield::Preset::two_bumps: {
      double rb = 0.6 * R;
      double base = A * radial_transform([rb](double r) { return bump(r / rb); }, 0.0, rb, rho);
      return 2.0 * std::cos(0.4 * R * xi.x) * base;
    }
    case gridfield::Preset::annulus:
      return A * radial_transform([R](double r) { return bump((r - 0.6 * R) / (0.4 * R)); }, 0.2 * R, R, rho);
  }
  return 0.0;
}

double band_discrepancy(const FarFieldDataset& ds1, const FarFieldDataset& ds2, double k, double tau) {
  require(ds1.directions.size() == ds2.directions.size() && ds1.frequencies == ds2.frequencies,
          "data_discrepancy: grid mismatch between datasets");
  for (std::size_t d = 0; d < ds1.n_dir(); ++d)
    require(norm(ds1.directions[d] - ds2.directions[d]) == 0.0, "data_discrepancy: grid mismatch between datasets");
  require_band(ds1, k, tau);
  const double w = 4.0 * pi / double(ds1.n_dir());
  auto nodes = band_nodes(ds1.frequencies, k);
  auto integrand = [&](double s) {
    double acc = 0.0;
    for (std::size_t d = 0; d < ds1.n_dir(); ++d) {
      cdouble u = interpolate(ds1, d, s) * std::conj(interpolate(ds1, d, s + tau)) -
                  interpolate(ds2, d, s) * std::conj(interpolate(ds2, d, s + tau));
      acc += w * std::norm(u);
    }
    return std::pow(s, 2.0 * ds1.m) * acc;
  };
  double acc = 0.0, prev = integrand(nodes[0]);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    double cur = integrand(nodes[i]);
    acc += 0.5 * (nodes[i] - nodes[i - 1]) * (prev + cur);
    prev = cur;
  }
  return acc / k;
}

double data_discrepancy(const FarFieldDataset& ds1, const FarFieldDataset& ds2, double K0, double K,
                        const std::vector<double>& taus) {
  require(K0 > 0.0 && K > K0, "discrepancy interval needs 0 < K0 < K");
  require(ds1.directions.size() == ds2.directions.size() && ds1.frequencies == ds2.frequencies,
          "data_discrepancy: grid mismatch between datasets");
  for (std::size_t d = 0; d < ds1.n_dir(); ++d)
    require(norm(ds1.directions[d] - ds2.directions[d]) == 0.0, "data_discrepancy: grid mismatch between datasets");
  require(!taus.empty(), "data_discrepancy: empty tau grid");
  const auto& f = ds1.frequencies;
  std::vector<std::size_t> ks;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] > K0 && f[i] <= K) ks.push_back(i);
  require(!ks.empty(), "data_discrepancy: no dataset frequency inside (K0, K]");
  const double top = 2.0 * f[ks.back()];
  for (double tau : taus) require_band(ds1, f[ks.back()], tau);
  const double scale = f.size() > 1 ? f[1] - f[0] : 1.0;
  const double w = 4.0 * pi / double(ds1.n_dir());
  std::size_t n_nodes = 0;
  while (n_nodes < f.size() && f[n_nodes] <= top + 1e-9 * scale) ++n_nodes;

  // Per tau: the integrand on the nodes, its cumulative trapezoid, then each band closes with
  // one partial panel ending at 2k.
  const auto nt = static_cast<int>(taus.size());
  std::vector<double> best(taus.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (int it = 0; it < nt; ++it) {
    const double tau = taus[static_cast<std::size_t>(it)];
    auto integrand = [&](double s, std::size_t node) {
      double acc = 0.0;
      for (std::size_t d = 0; d < ds1.n_dir(); ++d) {
        cdouble a1 = node < f.size() ? ds1.at(d, node) : interpolate(ds1, d, s);
        cdouble a2 = node < f.size() ? ds2.at(d, node) : interpolate(ds2, d, s);
        cdouble u = a1 * std::conj(interpolate(ds1, d, s + tau)) - a2 * std::conj(interpolate(ds2, d, s + tau));
        acc += w * std::norm(u);
      }
      return std::pow(s, 2.0 * ds1.m) * acc;
    };
    std::vector<double> G(n_nodes), C(n_nodes, 0.0);
    for (std::size_t i = 0; i < n_nodes; ++i) G[i] = integrand(f[i], i);
    for (std::size_t i = 1; i < n_nodes; ++i) C[i] = C[i - 1] + 0.5 * (f[i] - f[i - 1]) * (G[i - 1] + G[i]);
    double m = 0.0;
    for (std::size_t a : ks) {
      const double k = f[a], end = 2.0 * k;
      std::size_t j = a;
      while (j + 1 < n_nodes && f[j + 1] < end && !same_node(f[j + 1], end, scale)) ++j;
      double g_end = integrand(end, f.size());
      double integral = C[j] - C[a] + 0.5 * (end - f[j]) * (G[j] + g_end);
      m = std::max(m, integral / k);
    }
    best[static_cast<std::size_t>(it)] = m;
  }
  return *std::max_element(best.begin(), best.end());
}

double stability_rhs(double eps_sq, double K0, double K, double M0, double alpha, double beta1, double beta2,
                     double C) {
  require(eps_sq > 0.0 && eps_sq < std::exp(-std::exp(1.0)), "stability_rhs: eps_sq must lie in (0, e^{-e})");
  require(K0 > 0.0 && K > 0.0 && M0 > 0.0 && alpha > 0.0 && beta1 > 0.0 && beta2 > 0.0 && C > 0.0,
          "stability_rhs: constants must be positive");
  double eps = std::sqrt(eps_sq);
  double loglog = std::log(std::abs(std::log(eps)));
  double arg = C * eps_sq + (M0 + std::pow(K0, 3.0 + 4.0 * alpha)) / std::pow(K * loglog, beta1);
  if (!(arg < 1.0)) throw PreconditionError("stability_rhs: not applicable (logarithm argument >= 1)");
  return std::pow(std::abs(std::log(arg)), -beta2);
}

StabilityReport stability_experiment(const StabilityConfig& cfg) {
  require(cfg.realizations >= 1, "experiment needs at least one realization");
  require(!cfg.bands.empty(), "experiment needs at least one band");
  require(cfg.model == "born0" || cfg.model == "full", "experiment model must be born0 or full");
  auto h1 = std::make_shared<const gridfield::StrengthField>(
      gridfield::strength_preset(cfg.preset, cfg.grid, cfg.amplitude, cfg.radius));
  const double r_extra = 0.5 * cfg.radius;
  const double a_extra = cfg.delta * cfg.amplitude;
  std::vector<double> v2 = h1->values;
  for (std::size_t i = 0; i < v2.size(); ++i)
    v2[i] += a_extra * bump(norm(cfg.grid.node(i)) / r_extra);
  auto h2 = std::make_shared<const gridfield::StrengthField>(gridfield::strength_from_values(*h1, v2));

  gridfield::StrengthField extra = gridfield::strength_preset(gridfield::Preset::single_bump, cfg.grid,
                                                              a_extra > 0.0 ? a_extra : 1.0, r_extra);
  auto pb_h1 = band_spectrum([&](Vec3 xi) { return analytic_hhat(*h1, xi); });
  auto pb_diff = band_spectrum([&](Vec3 xi) { return a_extra > 0.0 ? -analytic_hhat(extra, xi) : cdouble(0.0); });
  const double pb_norm = band_l2_distance(pb_h1);
  const double diff_norm = band_l2_distance(pb_diff);

  double kmax = *std::max_element(cfg.bands.begin(), cfg.bands.end());
  double kmin = std::min(cfg.K0, *std::min_element(cfg.bands.begin(), cfg.bands.end()));
  auto freqs = frequency_grid(kmin, 2.0 * kmax + cfg.tau_max, frequency_step(cfg.n_tau, cfg.tau_max));
  if (freqs.back() < 2.0 * kmax + cfg.tau_max - 1e-9) freqs.push_back(freqs.back() + frequency_step(cfg.n_tau, cfg.tau_max));
  auto dirs = standard_directions(cfg.n_dir);
  auto taus = tau_grid(cfg.n_tau, cfg.tau_max);

  const std::size_t nb = cfg.bands.size();
  StabilityReport rep;
  rep.bands = cfg.bands;
  rep.rows.resize(static_cast<std::size_t>(cfg.realizations) * nb);
  std::vector<std::string> errors(static_cast<std::size_t>(cfg.realizations));
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (int r = 0; r < cfg.realizations; ++r) {
    try {
      std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(r);
      auto V1 = gridfield::synthesize_potential(h1, cfg.m, seed);
      auto V2 = gridfield::synthesize_potential(h2, cfg.m, seed);
      FarFieldDataset ds1, ds2;
      if (cfg.model == "born0") {
        ds1 = born0_sweep(V1, dirs, freqs);
        ds2 = born0_sweep(V2, dirs, freqs);
      } else {
        forward::SolverOptions opt;
        opt.tol = cfg.solver_tol;
        ds1 = backscatter_sweep(V1, dirs, freqs, opt);
        ds2 = backscatter_sweep(V2, dirs, freqs, opt);
      }
      for (std::size_t b = 0; b < nb; ++b) {
        double K = cfg.bands[b];
        auto hh1 = estimate_hhat(ds1, cfg.n_tau, cfg.n_dir, K, cfg.tau_max);
        auto hh2 = estimate_hhat(ds2, cfg.n_tau, cfg.n_dir, K, cfg.tau_max);
        auto rec1 = reconstruct_strength(hh1, cfg.grid, &pb_h1);
        auto rec2 = reconstruct_strength(hh2, cfg.grid);
        StabilityRow row;
        row.realization = r;
        row.seed = seed;
        row.K = K;
        row.epsilon_sq = K > cfg.K0 ? data_discrepancy(ds1, ds2, cfg.K0, K, taus) : 0.0;
        BandSpectrum dd = rec1.spectrum;
        for (std::size_t i = 0; i < dd.values.size(); ++i)
          dd.values[i] -= rec2.spectrum.values[i] + pb_diff.values[i];
        row.true_difference = diff_norm;
        row.difference_error = band_l2_distance(dd);
        row.reconstruction_error = pb_norm > 0.0 ? rec1.l2_error / pb_norm : rec1.l2_error;
        row.success = row.difference_error <= cfg.success_factor * pb_norm;
        try {
          row.rhs = row.epsilon_sq > 0.0 ? stability_rhs(row.epsilon_sq, cfg.K0, K, cfg.M0, cfg.alpha, cfg.beta1,
                                                         cfg.beta2, cfg.C)
                                         : -1.0;
        } catch (const PreconditionError&) {
          row.rhs = -1.0;
        }
        rep.rows[static_cast<std::size_t>(r) * nb + b] = row;
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(r)] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw NumericalError("stability experiment failed: " + e);
  for (std::size_t b = 0; b < nb; ++b) {
    int ok = 0;
    std::vector<double> errs;
    for (int r = 0; r < cfg.realizations; ++r) {
      const auto& row = rep.rows[static_cast<std::size_t>(r) * nb + b];
      ok += row.success;
      errs.push_back(row.reconstruction_error);
    }
    std::sort(errs.begin(), errs.end());
    std::size_t mid = errs.size() / 2;
    double median = errs.size() % 2 ? errs[mid] : 0.5 * (errs[mid - 1] + errs[mid]);
    rep.success_fraction.push_back(double(ok) / cfg.realizations);
    rep.median_error.push_back(median);
  }
  return rep;
}

std::string stability_csv(const StabilityReport& rep) {
  std::ostringstream os;
  os << "realization,seed,K,epsilon_sq,true_difference,difference_error,reconstruction_error,success,rhs\n";
  for (const auto& r : rep.rows) {
    os << r.realization << ',' << r.seed << ',' << fmt(r.K) << ',' << fmt(r.epsilon_sq) << ',' << fmt(r.true_difference)
       << ',' << fmt(r.difference_error) << ',' << fmt(r.reconstruction_error) << ',' << (r.success ? 1 : 0) << ','
       << fmt(r.rhs) << '\n';
  }
  os << "\nK,success_fraction,median_reconstruction_error\n";
  for (std::size_t b = 0; b < rep.bands.size(); ++b) {
    os << fmt(rep.bands[b]) << ',' << fmt(rep.success_fraction[b]) << ',' << fmt(rep.median_error[b]) << '\n';
  }
  return os.str();
}

}  // namespace scatterlab::inverse
