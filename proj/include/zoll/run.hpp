#pragma once
// Run orchestration: each subcommand turns a RunConfig into artifacts on disk.
// Deterministic for fixed config + seed; every artifact carries a header with
// the config hash and tool version.

#include <optional>
#include <stdexcept>
#include <string>

#include "zoll/config.hpp"
#include "zoll/spectral.hpp"

namespace zoll {

struct MissingPrerequisite : std::runtime_error {
  explicit MissingPrerequisite(const std::string& m) : std::runtime_error(m) {}
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides [wave] seed
  int threads = 0;                    // 0 = library default
  double t_cap = 4.0 * 3.14159265358979324;  // geodesics entry-time cap
  std::string damping;                // overrides [wave] damping
  int mode_n = -1, mode_k = -1;       // wave: single-mode initial data
  double fit_lo = -1.0, fit_hi = -1.0;  // wave: decay fit window
};

// throws ConfigError / MissingPrerequisite / module errors; returns 0 on success
int run_subcommand(const std::string& subcommand, const RunConfig& config,
                   const RunOptions& options = {});

// invariants checked by `report` and by the acceptance harness
struct StructuralReport {
  double meridian_defect = 0.0;   // |meridian length - pi|
  double gram_defect = 0.0;       // max |<w_i, w_j> - delta_ij| within fixed k
  bool exclusion_ok = false;      // lambda^2 > k^2 for every member
  double wronskian_dev = 0.0;     // max IVP-pair Wronskian deviation, k != 0
};
StructuralReport structural_suite(const IsothermalChart& chart,
                                  const Spectrum& spectrum);

}  // namespace zoll
