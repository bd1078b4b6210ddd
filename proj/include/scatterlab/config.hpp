#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "scatterlab/grid.hpp"
#include "scatterlab/inverse.hpp"

namespace scatterlab::config {

using json = nlohmann::json;

/// Experiment document. Every key is optional; see default_table() for the defaults.
struct ExperimentConfig {
  int grid_n = 64;
  double grid_L = 0.5;
  double field_m = 3.0;
  std::string field_preset = "single_bump";
  double field_amplitude = 1.0;
  double field_radius = 0.4;
  double band_K0 = 4.0;
  double band_K = 32.0;
  int band_nk = 3;  // dyadic bands K / 2^{nk-1}, ..., K / 2, K
  int directions_n = 26;
  double solver_tol = 1e-8;
  std::string solver_model = "born0";
  int ensemble_R = 50;
  std::uint64_t seeds_base = 1;
  int tau_n = 8;
  double tau_max = 0.45;
  double experiment_delta = 0.1;
  double experiment_success_factor = 0.5;
  double stability_C = 1.0;
  double stability_M0 = 1.0;
  double stability_alpha = 0.2;
  double stability_beta1 = 1.0;
  double stability_beta2 = 0.25;
  int threads = 0;  // 0 keeps the process default

  std::vector<double> bands() const;
  GridSpec3 grid() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Builds and validates a config; errors name the offending key.
ExperimentConfig config_from_json(const json& doc);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Fully populated nested document; config_from_json(config_to_json(c)) == c.
json config_to_json(const ExperimentConfig& cfg);

/// CRC-32 of the canonical serialization, as 8 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// (key, default) rows for documentation.
std::vector<std::pair<std::string, std::string>> default_table();

inverse::StabilityConfig stability_config(const ExperimentConfig& cfg);

}  // namespace scatterlab::config
