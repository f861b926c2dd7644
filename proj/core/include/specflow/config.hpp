#pragma once

#include <string>
#include <vector>

#include "specflow/pairgen.hpp"

namespace specflow::cli {

/// Flat experiment configuration. Parses from / serializes to a key = value
/// document; serialization materializes every default so a written config is
/// self-describing and round-trips losslessly.
struct ExperimentConfig {
  // pair
  std::string law = "explicit";       // power | paper-exponential | explicit
  double power_k = 2.0;
  std::string power_c = "50";
  std::vector<std::string> floors = {"17", "79", "42962"};
  int levels = 2;
  int n_first = 5;
  std::vector<long> alpha_seed = {0, 2};
  std::vector<long> alpha_prime_seed = {0};
  std::string budget = "default";
  int closure_factor = 16;

  // precision
  int precision_bits = 192;
  long long max_iterate = 10'000'000;

  // ceiling
  double staircase_scale = 0.0;  // 0 = auto
  double target_mass = 0.4;
  int grid_exponent = 18;
  std::vector<long long> radius = {0, 59200};
  double rel_threshold = 1e-4;
  double weighted_rel_threshold = 1e-2;
  double weight_cap = 3e4;
  int positivity_grid_exponent = 11;

  // analysis
  std::uint64_t seed = 20240101;
  std::size_t correlation_samples = 10000;
  int times_per_window = 3;
  int defect_grid = 8;
  long long defect_m_cap = 1'000'000;
  double stretch_k_target = 4.0;
  int stretch_intervals = 16;
  int stretch_y_samples = 2;
  int staircase_samples = 24;
  std::vector<double> box_a = {0.05, 0.45, 0.10, 0.55, 0.00, 0.30};
  std::vector<double> box_b = {0.50, 0.95, 0.55, 0.95, 0.05, 0.35};

  int threads = 1;

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse(const std::string& text);
  std::string serialize() const;

  pairgen::GrowthLaw growth_law() const;
  pairgen::PairSeed pair_seed() const;
  pairgen::BuildOptions build_options() const;
};

}  // namespace specflow::cli
