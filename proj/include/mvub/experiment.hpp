#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvub/analysis.hpp"
#include "mvub/estimator.hpp"

namespace mvub {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Moment test function x -> (x[component])^power, component 1-based.
struct PhiSpec {
  int component = 1;
  int power = 1;

  Phi make(int dim) const;
};

struct KdeSpec {
  std::optional<double> bandwidth;  // default depends on the model
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  int grid_points = 201;
  std::vector<int> components;  // 1-based; empty means all
};

struct DiagnoseSpec {
  int level = 4;
  int particles = 200;
  int t_max = 20;
  double x0_a = -2.0;
  double x0_b = 2.0;
};

struct ExperimentConfig {
  std::string mode;  // run | mse | kde | diagnose | cost
  std::string model_name;
  Model model;
  double default_bandwidth = 0.1;
  EstimatorConfig estimator;
  PhiSpec phi;
  int m = 1000;
  int runs = 50;
  std::vector<int> m_values;
  std::optional<double> truth;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out = "out";
  KdeSpec kde;
  DiagnoseSpec diagnose;
};

// Strict parse: unknown keys, malformed values and invalid parameters all
// raise ConfigError.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

// Executes one experiment; output files are written under config.out.
// Throws ConfigError for configuration problems and ReplicateError /
// BlowUpError for simulation failures.
void run_experiment(const ExperimentConfig& config);

// 17-significant-digit decimal form used for all CSV floats.
std::string format_float(double v);

}  // namespace mvub
