#include "scatterlab/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "scatterlab/datastore.hpp"
#include "scatterlab/gridfield.hpp"

namespace scatterlab::config {
namespace {

using Cfg = ExperimentConfig;

struct Field {
  std::string key;
  std::function<void(Cfg&, const json&)> read;
  std::function<json(const Cfg&)> write;
};

template <class T>
Field field(const char* key, T Cfg::*member) {
  auto read = [key, member](Cfg& c, const json& v) {
    bool ok;
    if constexpr (std::is_same_v<T, std::string>) {
      ok = v.is_string();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    } else if constexpr (std::is_integral_v<T>) {
      ok = v.is_number_integer();
    } else {
      ok = v.is_number();
    }
    if (!ok) throw PreconditionError(std::string("config key '") + key + "' has the wrong type");
    c.*member = v.get<T>();
  };
  auto write = [member](const Cfg& c) { return json(c.*member); };
  return {key, read, write};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      field("grid.n", &Cfg::grid_n),
      field("grid.L", &Cfg::grid_L),
      field("field.m", &Cfg::field_m),
      field("field.preset", &Cfg::field_preset),
      field("field.amplitude", &Cfg::field_amplitude),
      field("field.radius", &Cfg::field_radius),
      field("band.K0", &Cfg::band_K0),
      field("band.K", &Cfg::band_K),
      field("band.nk", &Cfg::band_nk),
      field("directions.n", &Cfg::directions_n),
      field("solver.tol", &Cfg::solver_tol),
      field("solver.model", &Cfg::solver_model),
      field("ensemble.R", &Cfg::ensemble_R),
      field("seeds.base", &Cfg::seeds_base),
      field("tau.n", &Cfg::tau_n),
      field("tau.max", &Cfg::tau_max),
      field("experiment.delta", &Cfg::experiment_delta),
      field("experiment.success_factor", &Cfg::experiment_success_factor),
      field("stability.C", &Cfg::stability_C),
      field("stability.M0", &Cfg::stability_M0),
      field("stability.alpha", &Cfg::stability_alpha),
      field("stability.beta1", &Cfg::stability_beta1),
      field("stability.beta2", &Cfg::stability_beta2),
      field("threads", &Cfg::threads),
  };
  return f;
}

void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw PreconditionError("config key '" + key + "' " + what);
}

void validate(const Cfg& c) {
  check(c.grid_n >= 16 && c.grid_n % 2 == 0, "grid.n", "must be an even integer >= 16");
  check(c.grid_L > 0.0, "grid.L", "must be positive");
  check(gridfield::order_in_range(c.field_m), "field.m", "must lie in (14/5, 4)");
  try {
    gridfield::parse_preset(c.field_preset);
  } catch (const PreconditionError&) {
    check(false, "field.preset", "must be one of single_bump, two_bumps, annulus");
  }
  check(c.field_amplitude > 0.0, "field.amplitude", "must be positive");
  check(c.field_radius > 0.0 && c.field_radius < 0.9 * c.grid_L, "field.radius", "must lie in (0, 0.9 grid.L)");
  check(c.band_K0 > 0.0, "band.K0", "must be positive");
  check(c.band_K0 < c.band_K, "band.K0/band.K", "must satisfy band.K0 < band.K");
  check(c.band_nk >= 1, "band.nk", "must be at least 1");
  check(c.band_K / std::pow(2.0, c.band_nk - 1) > c.band_K0, "band.nk/band.K0",
        "lowest band K / 2^(nk-1) must exceed band.K0");
  check(c.directions_n >= 6, "directions.n", "must be at least 6");
  check(c.solver_tol > 0.0 && c.solver_tol < 1.0, "solver.tol", "must lie in (0, 1)");
  check(c.solver_model == "born0" || c.solver_model == "full", "solver.model", "must be born0 or full");
  check(c.ensemble_R >= 1, "ensemble.R", "must be at least 1");
  check(c.tau_n >= 4, "tau.n", "must be at least 4");
  check(c.tau_max > 0.0 && c.tau_max < 0.5, "tau.max", "must lie in (0, 1/2)");
  check(c.experiment_delta >= 0.0, "experiment.delta", "must be nonnegative");
  check(c.experiment_success_factor > 0.0, "experiment.success_factor", "must be positive");
  check(c.stability_C > 0.0, "stability.C", "must be positive");
  check(c.stability_M0 > 0.0, "stability.M0", "must be positive");
  check(c.stability_alpha > 0.0 && c.stability_alpha < 0.25, "stability.alpha", "must lie in (0, 1/4)");
  check(c.stability_beta1 > 0.0, "stability.beta1", "must be positive");
  check(c.stability_beta2 > 0.0, "stability.beta2", "must be positive");
  check(c.threads >= 0, "threads", "must be nonnegative");
}

std::string dotted(const std::string& pointer) {
  std::string out = pointer.substr(1);
  for (auto& ch : out)
    if (ch == '/') ch = '.';
  return out;
}

}  // namespace

std::vector<double> ExperimentConfig::bands() const {
  std::vector<double> b;
  for (int i = band_nk - 1; i >= 0; --i) b.push_back(band_K / std::pow(2.0, i));
  return b;
}

GridSpec3 ExperimentConfig::grid() const { return make_grid(grid_n, grid_L); }

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw PreconditionError("config must be a JSON object");
  Cfg c;
  const auto flat = doc.flatten();
  for (const auto& [pointer, value] : flat.items()) {
    if (pointer.empty() || doc.at(json::json_pointer(pointer)).is_object()) continue;  // empty objects
    std::string key = dotted(pointer);
    bool known = false;
    for (const auto& f : fields()) {
      if (f.key == key) {
        f.read(c, value);
        known = true;
        break;
      }
    }
    if (!known) throw PreconditionError("config key '" + key + "' is not recognised");
  }
  validate(c);
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw PreconditionError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

json config_to_json(const ExperimentConfig& cfg) {
  json flat = json::object();
  for (const auto& f : fields()) {
    std::string pointer = "/" + f.key;
    for (auto& ch : pointer)
      if (ch == '.') ch = '/';
    flat[pointer] = f.write(cfg);
  }
  return flat.unflatten();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::string text = config_to_json(cfg).dump();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", datastore::crc32_of(text.data(), text.size()));
  return buf;
}

std::vector<std::pair<std::string, std::string>> default_table() {
  Cfg c;
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& f : fields()) rows.emplace_back(f.key, f.write(c).dump());
  return rows;
}

inverse::StabilityConfig stability_config(const ExperimentConfig& cfg) {
  inverse::StabilityConfig s;
  s.grid = cfg.grid();
  s.m = cfg.field_m;
  s.preset = gridfield::parse_preset(cfg.field_preset);
  s.amplitude = cfg.field_amplitude;
  s.radius = cfg.field_radius;
  s.delta = cfg.experiment_delta;
  s.bands = cfg.bands();
  s.K0 = cfg.band_K0;
  s.realizations = cfg.ensemble_R;
  s.base_seed = cfg.seeds_base;
  s.n_dir = cfg.directions_n;
  s.n_tau = cfg.tau_n;
  s.tau_max = cfg.tau_max;
  s.success_factor = cfg.experiment_success_factor;
  s.model = cfg.solver_model;
  s.solver_tol = cfg.solver_tol;
  s.C = cfg.stability_C;
  s.M0 = cfg.stability_M0;
  s.alpha = cfg.stability_alpha;
  s.beta1 = cfg.stability_beta1;
  s.beta2 = cfg.stability_beta2;
  return s;
}

}  // namespace scatterlab::config
