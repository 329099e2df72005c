#pragma once
// Sectioned text configuration with strict key checking. Unknown keys are
// rejected by name: silent typos are the main reproducibility hazard.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace zoll {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct RunConfig {
  // [surface]
  std::vector<double> coefficients;  // empty = round sphere
  int grid_size = 4097;
  // [chart]
  double X = 8.0;
  int n_points = 2049;
  // [spectral]
  int n_max = 10;
  double A_config = 1.0;
  double window_pad = 0.0;  // extra search margin; deviations beyond A_config
                            // inside it are reported as outliers
  int grid_refine = 2;      // chart refinement factor for the spectral stage
  // [observability]
  double epsilon = 0.2;
  double epsilon_a = 0.1;
  double band = 0.25;
  // [wave]
  int wave_n_max = 3;
  double dt = 1e-3;
  double T = 20.0;
  std::string damping = "indicator_upper";
  std::uint64_t seed = 1;
  // [output]
  std::string directory = "out";
  std::vector<std::string> formats = {"csv", "json"};

  // canonical key = value dump; equal configs hash equally
  std::string canonical() const;
  std::uint64_t hash() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace zoll
