#pragma once

// The five fully discrete schemes for
//   (u^{n+1} - u^n)/tau = Delta_h omega^{n+1}
// with their own chemical potentials, plus the exact per-mode
// solvability/stability check that stands in for the kernel constant C_J.

#include <optional>
#include <string>
#include <string_view>

#include "nch/energy.hpp"
#include "nch/field.hpp"
#include "nch/kernel.hpp"
#include "nch/spectral.hpp"

namespace nch {

enum class Scheme { backward_euler, convex_splitting, ssi1, bdf2, two_li };
enum class StabilityPolicy { enforce, warn, ignore };

std::string_view to_string(Scheme scheme);
std::string_view to_string(StabilityPolicy policy);
std::optional<Scheme> parse_scheme(std::string_view name);
std::optional<StabilityPolicy> parse_policy(std::string_view name);

bool is_two_step(Scheme scheme);
bool is_linear(Scheme scheme);

struct SchemeConfig {
  Scheme scheme = Scheme::backward_euler;
  double tau = 1e-2;
  double epsilon = 1.0;
  /// Stabilization S of the SSI1 scheme.
  double stabilization = 0.0;
  /// Double well for backward Euler / convex splitting / BDF2 (F_K allowed
  /// for BE and BDF2); truncated F_K for SSI1 and 2LI.
  PotentialParams potential = PotentialParams::double_well();
  double newton_tol = 1e-11;
  int newton_max_iter = 50;
  double krylov_tol = 1e-12;
  StabilityPolicy stability_policy = StabilityPolicy::enforce;
  /// Optional user-supplied C_J; only used to report the literal time-step
  /// bound next to the exact per-mode check.
  std::optional<double> cj;

  /// Throws ConfigError on inconsistent parameters.
  void validate() const;
};

struct SchemeState {
  Field u_curr;
  std::optional<Field> u_prev;
  std::optional<Field> omega_last;
  long step_index = 0;
  double time = 0.0;
};

struct StepResult {
  Field u_next;
  Field omega_next;
  int newton_iters = 0;
  /// ||(time difference quotient) - Delta_h omega_next||_2
  double residual = 0.0;
};

StepResult step_backward_euler(const SchemeState& state, const SchemeConfig& cfg,
                               const SampledKernel& kernel, const SpectralCache& cache);
StepResult step_convex_splitting(const SchemeState& state, const SchemeConfig& cfg,
                                 const SampledKernel& kernel, const SpectralCache& cache);
StepResult step_ssi1(const SchemeState& state, const SchemeConfig& cfg,
                     const SampledKernel& kernel, const SpectralCache& cache);
/// Throws StateError if state.u_prev is missing.
StepResult step_bdf2(const SchemeState& state, const SchemeConfig& cfg,
                     const SampledKernel& kernel, const SpectralCache& cache);
/// Throws StateError if state.u_prev is missing.
StepResult step_2li(const SchemeState& state, const SchemeConfig& cfg,
                    const SampledKernel& kernel, const SpectralCache& cache);

struct SolvabilityReport {
  bool admissible = false;
  /// Smallest slack over every condition that applies to the scheme.
  double margin = 0.0;
  /// min over nonzero modes of q(m); +inf when the scheme has no per-mode
  /// condition.
  double per_mode_min = 0.0;
  double gamma0 = 0.0;
  double conv_one = 0.0;
  double beta = 0.0;
  double stabilization = 0.0;
  /// Literal tau bound built from a user-supplied C_J, when given.
  std::optional<double> cj_tau_bound;
  /// Human-readable list of the failing conditions (empty when admissible).
  std::string detail;
};

/// Per-mode check
///   q(m) = 1/(c_s tau lambda_m) + eps^2 ([J*1] - Jhat_m) - c_0,
/// c_s = 1 (backward Euler) or 2/3 (BDF2, 2LI), c_0 = 1, or 3 beta for 2LI,
/// combined with gamma0 > 0, S >= beta/2 (SSI1) and beta <= (gamma0+1)/3
/// (2LI). Per-mode conditions are strict.
SolvabilityReport check_solvability(const SchemeConfig& cfg, const SampledKernel& kernel,
                                    const SpectralCache& cache);

/// Owns the configuration of a run and applies the stability policy once.
/// Two-step schemes bootstrap their first step: BDF2 from backward Euler,
/// 2LI from SSI1 with S = beta.
class Stepper {
 public:
  Stepper(SchemeConfig cfg, const SampledKernel& kernel, const SpectralCache& cache);

  const SchemeConfig& config() const { return cfg_; }
  const SolvabilityReport& report() const { return report_; }
  Model model() const { return Model{kernel_, cfg_.epsilon, cfg_.potential, cache_}; }

  /// Advances the state in place by one step and returns the step data.
  StepResult advance(SchemeState& state) const;

 private:
  SchemeConfig cfg_;
  const SampledKernel& kernel_;
  const SpectralCache& cache_;
  SolvabilityReport report_;
};

}  // namespace nch
