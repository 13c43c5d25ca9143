#pragma once

// Time-integration loop: diagnostics, equilibrium detection against the
// discrete stationary system, and hooks for persisting the trajectory.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nch/steppers.hpp"

namespace nch {

struct DiagnosticsRecord {
  long step = 0;
  double time = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  /// BDF2 / 2LI only.
  std::optional<double> modified_energy;
  double increment_l2 = 0.0;
  double increment_hneg1 = 0.0;
  double grad_omega_l2 = 0.0;
  double omega_variance = 0.0;
  int newton_iters = 0;
  /// E(u^n) - E(u^{n+1}) from differences; not part of the CSV.
  double energy_decrease = 0.0;
  /// max(increment_l2 / tau, equilibrium_residual); not part of the CSV.
  double stationarity = 0.0;
};

enum class Termination { equilibrium, max_steps, error };
std::string_view to_string(Termination termination);

struct RunOptions {
  long max_steps = 100000;
  double eq_tol = 1e-9;
  /// Every accepted step with index divisible by record_every is recorded;
  /// the last step of a run is always recorded.
  long record_every = 1;
  /// 0 disables snapshots.
  long snapshot_every = 0;
  std::function<void(const DiagnosticsRecord&)> on_record;
  std::function<void(const SchemeState&)> on_snapshot;
};

struct RunResult {
  SchemeState final_state;
  std::vector<DiagnosticsRecord> records;
  Termination termination = Termination::max_steps;
  std::string error_detail;
  /// Index of the step that failed, -1 otherwise.
  long error_step = -1;
  double equilibrium_residual = 0.0;
  double initial_energy = 0.0;
};

/// max(||omega - mean(omega)||_2, ||omega - F'(u) - eps^2[J*1]u + eps^2[J*u]||_2)
double equilibrium_residual(const Field& u, const Field& omega, const Model& model);

/// Starts from u0 (step 0, time 0).
RunResult run(const Field& u0, const SchemeConfig& cfg, const SampledKernel& kernel,
              const SpectralCache& cache, const RunOptions& options);
/// Continues from a saved state; max_steps counts absolute step indices.
RunResult run(SchemeState state, const SchemeConfig& cfg, const SampledKernel& kernel,
              const SpectralCache& cache, const RunOptions& options);

struct H1H2Report {
  long first_step = 0;
  long last_step = 0;
  std::size_t samples = 0;
  /// min over the window of (E^n - E^{n+1}) / ||u^{n+1} - u^n||_2^2
  double c2 = 0.0;
  /// max over the window of ||grad_h omega^{n+1}||_2 / ||u^{n+1} - u^n||_2
  double c3 = 0.0;
};

/// Empirical constants of the decay hypotheses over the last `window`
/// records. Steps with ||du||_2 < 1e-14 are excluded; nullopt when nothing
/// is left. Throws PreconditionError when fewer than `window` records exist.
std::optional<H1H2Report> h1h2_probe(const std::vector<DiagnosticsRecord>& records,
                                     std::size_t window);

/// Seeded uniform perturbation in [-delta, delta] about `mean`, shifted so
/// that its mean is exactly `mean` up to rounding.
Field random_initial_field(const GridGeometry& geometry, std::uint64_t seed, double mean = 0.0,
                           double delta = 0.05);

}  // namespace nch
