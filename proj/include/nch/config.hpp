#pragma once

// Run configuration: flat "key = value" text with dotted keys.
//
//   # comment (a '#' starts a comment anywhere on a line)
//   grid.N = 32
//   scheme.name = bdf2
//
// Every key may appear at most once; unknown keys, keys that do not apply
// to the selected kernel/potential/init variant, and malformed values are
// rejected with the offending line and key.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "nch/driver.hpp"
#include "nch/kernel.hpp"
#include "nch/steppers.hpp"

namespace nch {

struct RunConfig {
  int grid_n = 32;
  double grid_l = 1.0;

  double epsilon = 16.0;
  std::string kernel_type = "gaussian";  // gaussian | constant | tabulated
  double kernel_cj = 1.0;                // Gaussian amplitude or the constant value
  double kernel_xi = 100.0;
  int kernel_images = 3;
  std::string kernel_path;
  std::string potential_type = "double_well";  // double_well | truncated
  double potential_k = 2.0;
  std::optional<double> model_cj;

  Scheme scheme = Scheme::backward_euler;
  double tau = 0.05;
  double stabilization = 0.0;
  StabilityPolicy stability_policy = StabilityPolicy::enforce;

  double newton_tol = 1e-11;
  int newton_max_iter = 50;
  double krylov_tol = 1e-12;

  long max_steps = 100000;
  double eq_tol = 1e-9;
  long record_every = 1;
  long snapshot_every = 0;
  std::uint64_t seed = 0;
  double init_mean = 0.0;
  double init_delta = 0.05;
  std::string init_snapshot_path;

  std::string output_dir = "output";

  /// Directory relative paths are resolved against (not emitted).
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;
  bool operator==(const RunConfig& other) const;
};

/// Parses and validates; throws ConfigError naming the line and key.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical form: fixed key order, shortest round-trip numbers.
std::string emit_config(const RunConfig& cfg);

/// Range and consistency checks; run by parse_config and again after
/// command-line overrides.
void validate(const RunConfig& cfg);

PotentialParams potential_params(const RunConfig& cfg);
SchemeConfig scheme_config(const RunConfig& cfg);
/// Reads the tabulated kernel file when needed.
KernelParams kernel_params(const RunConfig& cfg);
RunOptions run_options(const RunConfig& cfg);
/// Seeded random field, or the snapshot named by run.init.snapshot_path.
Field initial_field(const RunConfig& cfg, const GridGeometry& geometry);

}  // namespace nch
