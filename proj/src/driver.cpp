#include "nch/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "nch/errors.hpp"

namespace nch {

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::equilibrium: return "equilibrium";
    case Termination::max_steps: return "max_steps";
    case Termination::error: return "error";
  }
  return "unknown";
}

namespace {

double variance_norm(const Field& omega) {
  Field centered = omega;
  const double m = mean(omega);
  for (double& v : centered.values()) v -= m;
  return norm2(centered);
}

double stationary_defect(const Field& u, const Field& omega, const Model& model) {
  return norm2(omega - chemical_potential(u, model));
}

Field zero_mean_difference(const Field& a, const Field& b) {
  return project_zero_mean(a - b);
}

DiagnosticsRecord make_record(const SchemeState& state, const Field& u_old,
                              const StepResult& step, const Stepper& stepper) {
  const Model model = stepper.model();
  const SchemeConfig& cfg = stepper.config();
  const Field& u = state.u_curr;
  const double h2 = u.geometry().h() * u.geometry().h();

  DiagnosticsRecord rec;
  rec.step = state.step_index;
  rec.time = state.time;
  CompensatedSum mass;
  for (double v : u.values()) mass.add(v);
  rec.mass = h2 * static_cast<double>(mass.value());
  rec.energy = energy(u, model);
  rec.energy_decrease = -energy_difference(u, u_old, model);

  // The increment is zero-mean up to rounding in the mean correction.
  const Field du = zero_mean_difference(u, u_old);
  rec.increment_l2 = norm2(du);
  rec.increment_hneg1 = norm_neg1(du, model.cache);
  if (cfg.scheme == Scheme::bdf2) {
    rec.modified_energy = modified_energy_bdf2(u, du, cfg.tau, model);
  } else if (cfg.scheme == Scheme::two_li) {
    rec.modified_energy = modified_energy_2li(u, du, cfg.tau, cfg.potential.beta(), model);
  }
  rec.grad_omega_l2 = gradient_norm2(step.omega_next);
  rec.omega_variance = variance_norm(step.omega_next);
  rec.newton_iters = step.newton_iters;
  const double defect = stationary_defect(u, step.omega_next, model);
  rec.stationarity =
      std::max({rec.increment_l2 / cfg.tau, rec.omega_variance, defect});
  return rec;
}

}  // namespace

double equilibrium_residual(const Field& u, const Field& omega, const Model& model) {
  require_same_geometry(u.geometry(), omega.geometry(), "equilibrium_residual");
  return std::max(variance_norm(omega), stationary_defect(u, omega, model));
}

RunResult run(const Field& u0, const SchemeConfig& cfg, const SampledKernel& kernel,
              const SpectralCache& cache, const RunOptions& options) {
  return run(SchemeState{u0, std::nullopt, std::nullopt, 0, 0.0}, cfg, kernel, cache, options);
}

RunResult run(SchemeState state, const SchemeConfig& cfg, const SampledKernel& kernel,
              const SpectralCache& cache, const RunOptions& options) {
  if (options.max_steps < 0) throw ConfigError("run.max_steps", "must be non-negative");
  if (!(options.eq_tol > 0.0)) throw ConfigError("run.eq_tol", "must be positive");
  if (options.record_every < 1) throw ConfigError("run.record_every", "must be at least 1");
  if (options.snapshot_every < 0) throw ConfigError("run.snapshot_every", "must be non-negative");
  if (!state.u_curr.all_finite()) throw PreconditionError("initial field is not finite");
  if (!(gamma0(kernel, cfg.epsilon) > 0.0) && cfg.stability_policy == StabilityPolicy::enforce) {
    throw StabilityError("gamma0 must be positive", gamma0(kernel, cfg.epsilon));
  }

  const Stepper stepper(cfg, kernel, cache);
  RunResult result{state, {}, Termination::max_steps, {}, -1, 0.0, 0.0};
  result.initial_energy = energy(state.u_curr, stepper.model());
  result.termination = Termination::max_steps;

  while (state.step_index < options.max_steps) {
    const Field u_old = state.u_curr;
    std::optional<StepResult> advanced;
    try {
      advanced.emplace(stepper.advance(state));
    } catch (const Error& e) {
      result.termination = Termination::error;
      result.error_step = state.step_index + 1;
      std::ostringstream msg;
      msg << "step " << result.error_step << ": " << e.what();
      result.error_detail = msg.str();
      break;
    }
    const StepResult& step = *advanced;
    if (!state.u_curr.all_finite()) {
      result.termination = Termination::error;
      result.error_step = state.step_index;
      result.error_detail = "step " + std::to_string(state.step_index) + ": non-finite field";
      break;
    }

    DiagnosticsRecord rec = make_record(state, u_old, step, stepper);
    const bool at_equilibrium = rec.stationarity <= options.eq_tol;
    const bool last = at_equilibrium || state.step_index >= options.max_steps;
    result.equilibrium_residual =
        equilibrium_residual(state.u_curr, step.omega_next, stepper.model());
    if (last || state.step_index % options.record_every == 0) {
      if (options.on_record) options.on_record(rec);
      result.records.push_back(rec);
    }
    if (options.on_snapshot && options.snapshot_every > 0 &&
        (state.step_index % options.snapshot_every == 0 || last)) {
      options.on_snapshot(state);
    }
    if (at_equilibrium) {
      result.termination = Termination::equilibrium;
      break;
    }
  }
  result.final_state = std::move(state);
  return result;
}

std::optional<H1H2Report> h1h2_probe(const std::vector<DiagnosticsRecord>& records,
                                     std::size_t window) {
  if (window == 0 || records.size() < window) {
    throw PreconditionError("h1h2_probe needs at least `window` records (window > 0)");
  }
  H1H2Report report;
  report.c2 = std::numeric_limits<double>::infinity();
  report.c3 = 0.0;
  for (std::size_t k = records.size() - window; k < records.size(); ++k) {
    const DiagnosticsRecord& r = records[k];
    if (r.increment_l2 < 1e-14) continue;
    if (report.samples == 0) report.first_step = r.step;
    report.last_step = r.step;
    ++report.samples;
    report.c2 = std::min(report.c2, r.energy_decrease / (r.increment_l2 * r.increment_l2));
    report.c3 = std::max(report.c3, r.grad_omega_l2 / r.increment_l2);
  }
  if (report.samples == 0) return std::nullopt;
  return report;
}

Field random_initial_field(const GridGeometry& geometry, std::uint64_t seed, double mean_value,
                           double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ConfigError("run.init.delta", "must be finite and non-negative");
  }
  if (!std::isfinite(mean_value)) throw ConfigError("run.init.mean", "must be finite");
  std::mt19937_64 gen(seed);
  Field u(geometry);
  for (double& v : u.values()) {
    // 53-bit uniform in [0,1) without relying on the distribution's internals.
    const double x = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    v = delta * (2.0 * x - 1.0);
  }
  const double shift = mean_value - mean(u);
  for (double& v : u.values()) v += shift;
  return u;
}

}  // namespace nch
