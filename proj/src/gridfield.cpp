#include "scatterlab/gridfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "scatterlab/fft.hpp"
#include "scatterlab/kernels.hpp"
#include "scatterlab/parallel.hpp"

namespace scatterlab::gridfield {
namespace {

double bump(double rho) { return std::abs(rho) < 1.0 ? std::exp(-1.0 / (1.0 - rho * rho)) : 0.0; }

}  // namespace

Preset parse_preset(const std::string& name) {
  if (name == "single_bump") return Preset::single_bump;
  if (name == "two_bumps") return Preset::two_bumps;
  if (name == "annulus") return Preset::annulus;
  throw PreconditionError("unknown strength preset '" + name + "'");
}

std::string preset_name(Preset preset) {
  switch (preset) {
    case Preset::single_bump: return "single_bump";
    case Preset::two_bumps: return "two_bumps";
    case Preset::annulus: return "annulus";
  }
  return "unknown";
}

double preset_value(Preset preset, double amplitude, double radius, Vec3 x) {
  switch (preset) {
    case Preset::single_bump:
      return amplitude * bump(norm(x) / radius);
    case Preset::two_bumps: {
      Vec3 c{0.4 * radius, 0.0, 0.0};
      return amplitude * (bump(norm(x - c) / (0.6 * radius)) + bump(norm(x + c) / (0.6 * radius)));
    }
    case Preset::annulus:
      return amplitude * bump((norm(x) - 0.6 * radius) / (0.4 * radius));
  }
  return 0.0;
}

double StrengthField::value_at(Vec3 x) const { return preset_value(preset, amplitude, radius, x); }

StrengthField strength_preset(Preset preset, const GridSpec3& grid, double amplitude, double radius) {
  require(amplitude > 0.0, "strength amplitude must be positive");
  require(radius > 0.0, "strength radius must be positive");
  require(radius < 0.9 * grid.box_half_width, "strength radius too large for the box (need radius < 0.9 L)");
  StrengthField h;
  h.grid = grid;
  h.preset = preset;
  h.amplitude = amplitude;
  h.radius = radius;
  h.sup_bound = amplitude;
  h.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) h.values[i] = preset_value(preset, amplitude, radius, grid.node(i));
  return h;
}

StrengthField strength_from_values(const StrengthField& like, std::vector<double> values) {
  require(values.size() == like.grid.size(), "strength values do not match the grid");
  StrengthField h = like;
  double top = 0.0;
  for (double v : values) {
    require(v >= 0.0, "strength values must be nonnegative");
    top = std::max(top, v);
  }
  h.values = std::move(values);
  h.sup_bound = std::max(like.sup_bound, top);
  return h;
}

std::vector<double> sample_white_noise(const GridSpec3& grid, std::uint64_t seed) {
  std::vector<double> out(grid.size());
  kernels::white_noise(grid, seed, out);
  return out;
}

std::vector<double> apply_radial_filter(std::span<const double> noise, const GridSpec3& grid,
                                        const std::function<double(double)>& symbol) {
  require(noise.size() == grid.size(), "filter input does not match the grid");
  const int n = grid.n_per_axis;
  const int nh = n / 2 + 1;
  RealFft3 fft(n);
  RealBuffer real(noise.begin(), noise.end());
  ComplexBuffer spec(fft.spectrum_size());
  fft.forward(real.data(), spec.data());

  std::vector<double> f2(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f2[static_cast<std::size_t>(i)] = grid.frequency(i) * grid.frequency(i);
  const double inv_n = 1.0 / static_cast<double>(grid.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < nh; ++c) {
        double rho = std::sqrt(f2[static_cast<std::size_t>(a)] + f2[static_cast<std::size_t>(b)] +
                               f2[static_cast<std::size_t>(c)]);
        std::size_t idx = (static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)) * nh + c;
        spec[idx] *= symbol(rho) * inv_n;
      }
    }
  }
  fft.backward(spec.data(), real.data());
  return std::vector<double>(real.begin(), real.end());
}

std::vector<double> apply_spectral_filter(std::span<const double> noise, const GridSpec3& grid, double m) {
  require(m > 2.0 && m < 4.0, "filter order m must lie in (2, 4)");
  const double half = -0.5 * m;
  return apply_radial_filter(noise, grid, [half](double rho) { return rho == 0.0 ? 0.0 : std::pow(rho, half); });
}

PotentialRealization synthesize_potential(std::shared_ptr<const StrengthField> strength, double m,
                                          std::uint64_t seed) {
  require(strength != nullptr, "synthesize_potential needs a strength field");
  require(order_in_range(m), "field.m must lie in (14/5, 4)");
  const GridSpec3& grid = strength->grid;
  auto noise = sample_white_noise(grid, seed);
  auto filtered = apply_spectral_filter(noise, grid, m);
  PotentialRealization v;
  v.grid = grid;
  v.m = m;
  v.seed = seed;
  v.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double h = strength->values[i];
    v.values[i] = h > 0.0 ? std::sqrt(h) * filtered[i] : 0.0;
  }
  v.strength = std::move(strength);
  return v;
}

PotentialRealization potential_from_values(const GridSpec3& grid, std::vector<double> values, double m) {
  require(values.size() == grid.size(), "potential values do not match the grid");
  PotentialRealization v;
  v.grid = grid;
  v.m = m;
  v.values = std::move(values);
  return v;
}

double singular_constant(double m) {
  require(m > 2.0 && m < 4.0, "singular_constant: m must lie in (2, 4)");
  if (m == 3.0) return -1.0 / (2.0 * pi * pi);
  // (1/2pi^2) int_0^inf t^{1-m} sin t dt, continued analytically past m = 3
  return std::tgamma(2.0 - m) * std::sin(0.5 * pi * (2.0 - m)) / (2.0 * pi * pi);
}

double kernel_singular_part(const StrengthField& strength, double m, Vec3 x, double r) {
  require(r > 0.0, "kernel_singular_part: r must be positive (the kernel is singular at r = 0)");
  double h = strength.value_at(x);
  if (h == 0.0) return 0.0;
  double c = singular_constant(m);
  return m == 3.0 ? c * h * std::log(r) : c * h * std::pow(r, m - 3.0);
}

CovarianceAccumulator::CovarianceAccumulator(std::shared_ptr<const StrengthField> strength, double m, Vec3 x,
                                             std::vector<double> separations)
    : strength_(std::move(strength)), m_(m), separations_(std::move(separations)) {
  require(strength_ != nullptr, "empirical_covariance: realizations carry no strength field");
  const GridSpec3& g = strength_->grid;
  int ix = g.nearest_index(x.x), iy = g.nearest_index(x.y), iz = g.nearest_index(x.z);
  require(ix >= 0 && iy >= 0 && iz >= 0, "empirical_covariance: probe point outside the grid");
  node_ = g.node(ix, iy, iz);
  centre_ = g.index(ix, iy, iz);
  double prev = 0.0;
  for (double r : separations_) {
    require(r >= 2.0 * g.spacing - 1e-12, "separations must be at least two grid spacings");
    require(r > prev, "separations must be strictly increasing");
    prev = r;
    long steps = std::lround(r / g.spacing);
    require(std::abs(r - steps * g.spacing) < 1e-9 * g.spacing, "separations must be whole multiples of the spacing");
    int s = static_cast<int>(steps);
    const int offs[6][3] = {{s, 0, 0}, {-s, 0, 0}, {0, s, 0}, {0, -s, 0}, {0, 0, s}, {0, 0, -s}};
    std::array<std::size_t, 6> idx{};
    for (int k = 0; k < 6; ++k) {
      int a = ix + offs[k][0], b = iy + offs[k][1], c = iz + offs[k][2];
      require(a >= 0 && a < g.n_per_axis && b >= 0 && b < g.n_per_axis && c >= 0 && c < g.n_per_axis,
              "empirical_covariance: probe leaves the grid");
      idx[static_cast<std::size_t>(k)] = g.index(a, b, c);
    }
    neighbours_.push_back(idx);
  }
  sum_.assign(separations_.size(), 0.0);
  sum2_.assign(separations_.size(), 0.0);
}

void CovarianceAccumulator::add(const PotentialRealization& v) {
  if (!(v.grid == strength_->grid) || v.m != m_ || v.strength.get() != strength_.get()) {
    throw PreconditionError("empirical_covariance: realizations do not share grid, order and strength");
  }
  const double v0 = v.values[centre_];
  for (std::size_t i = 0; i < separations_.size(); ++i) {
    double acc = 0.0;
    for (auto j : neighbours_[i]) acc += v0 * v.values[j];
    acc /= 6.0;
    sum_[i] += acc;
    sum2_[i] += acc * acc;
  }
  ++count_;
}

CovarianceProbe CovarianceAccumulator::result() const {
  require(count_ >= 100, "empirical_covariance needs at least 100 realizations");
  CovarianceProbe probe;
  probe.separations = separations_;
  const double R = static_cast<double>(count_);
  for (std::size_t i = 0; i < separations_.size(); ++i) {
    double mean = sum_[i] / R;
    double var = std::max(0.0, (sum2_[i] - R * mean * mean) / (R - 1.0));
    probe.empirical.push_back(mean);
    probe.standard_error.push_back(std::sqrt(var / R));
    probe.singular_model.push_back(kernel_singular_part(*strength_, m_, node_, separations_[i]));
    probe.remainder_bound = std::max(probe.remainder_bound, std::abs(mean - probe.singular_model.back()));
  }
  return probe;
}

CovarianceProbe empirical_covariance(std::span<const PotentialRealization> realizations, Vec3 x,
                                     const std::vector<double>& separations) {
  require(realizations.size() >= 100, "empirical_covariance needs at least 100 realizations");
  CovarianceAccumulator acc(realizations.front().strength, realizations.front().m, x, separations);
  for (const auto& v : realizations) acc.add(v);
  return acc.result();
}

double support_radius(const GridSpec3& grid, std::span<const double> values) {
  double r = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) r = std::max(r, norm(grid.node(i)));
  }
  return r;
}

}  // namespace scatterlab::gridfield
