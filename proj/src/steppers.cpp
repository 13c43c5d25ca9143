#include "nch/steppers.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "nch/errors.hpp"
#include "nch/newton.hpp"

namespace nch {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::backward_euler: return "backward_euler";
    case Scheme::convex_splitting: return "convex_splitting";
    case Scheme::ssi1: return "ssi1";
    case Scheme::bdf2: return "bdf2";
    case Scheme::two_li: return "two_li";
  }
  return "unknown";
}

std::string_view to_string(StabilityPolicy policy) {
  switch (policy) {
    case StabilityPolicy::enforce: return "enforce";
    case StabilityPolicy::warn: return "warn";
    case StabilityPolicy::ignore: return "ignore";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::backward_euler, Scheme::convex_splitting, Scheme::ssi1, Scheme::bdf2,
                   Scheme::two_li}) {
    if (to_string(s) == name) return s;
  }
  if (name == "2li") return Scheme::two_li;
  return std::nullopt;
}

std::optional<StabilityPolicy> parse_policy(std::string_view name) {
  for (StabilityPolicy p :
       {StabilityPolicy::enforce, StabilityPolicy::warn, StabilityPolicy::ignore}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

bool is_two_step(Scheme scheme) { return scheme == Scheme::bdf2 || scheme == Scheme::two_li; }
bool is_linear(Scheme scheme) { return scheme == Scheme::ssi1 || scheme == Scheme::two_li; }

void SchemeConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("scheme.tau", "must be positive");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("model.epsilon", "must be positive");
  }
  if (!(stabilization >= 0.0) || !std::isfinite(stabilization)) {
    throw ConfigError("scheme.S", "must be non-negative");
  }
  if (!(newton_tol > 0.0)) throw ConfigError("solver.newton_tol", "must be positive");
  if (newton_max_iter < 1) throw ConfigError("solver.newton_max_iter", "must be at least 1");
  if (!(krylov_tol > 0.0) || krylov_tol >= 1.0) {
    throw ConfigError("solver.krylov_tol", "must lie in (0, 1)");
  }
  if (cj && !(*cj > 0.0)) throw ConfigError("model.CJ", "must be positive when given");
  const bool truncated = potential.kind() == PotentialParams::Kind::truncated;
  if (is_linear(scheme) && !truncated) {
    throw ConfigError("model.potential.type",
                      std::string(to_string(scheme)) + " requires the truncated potential");
  }
  if (scheme == Scheme::convex_splitting && truncated) {
    throw ConfigError("model.potential.type", "convex_splitting requires the double_well potential");
  }
}

namespace {

/// eps^2 ([J*1] - Jhat_m), zero for the constant mode.
std::vector<double> nonlocal_symbol(const SampledKernel& kernel, double epsilon) {
  const auto sym = kernel.symbol();
  std::vector<double> out(sym.size());
  const double e2 = epsilon * epsilon;
  for (std::size_t m = 0; m < sym.size(); ++m) out[m] = e2 * (kernel.conv_one() - sym[m]);
  out[0] = 0.0;
  return out;
}

Field pointwise(const Field& u, double (*f)(const PotentialParams&, double),
                const PotentialParams& params) {
  Field out(u.geometry());
  auto dst = out.values();
  const auto src = u.values();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = f(params, src[k]);
  return out;
}

void restore_mean(Field& u, double target_mean) {
  const double shift = target_mean - mean(u);
  if (shift == 0.0) return;
  for (double& v : u.values()) v += shift;
}

/// Solves  a v - Delta_h(omega(v)) = b  with
///   omega(v) = N(v) + L v + e,
/// N pointwise, L diagonal in mode space, e explicit.
struct ImplicitProblem {
  double a;
  Field b;
  Field e;
  std::vector<double> linear_symbol;
  /// N(v) = cubic ? v^3 : F'(v); N'(v) likewise.
  bool cubic_only;
  PotentialParams potential;
};

Field nonlinear_part(const ImplicitProblem& p, const Field& v) {
  if (!p.cubic_only) return pointwise(v, potential_d1, p.potential);
  Field out(v.geometry());
  auto dst = out.values();
  const auto src = v.values();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] * src[k] * src[k];
  return out;
}

Field nonlinear_slope(const ImplicitProblem& p, const Field& v) {
  if (!p.cubic_only) return pointwise(v, potential_d2, p.potential);
  Field out(v.geometry());
  auto dst = out.values();
  const auto src = v.values();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = 3.0 * src[k] * src[k];
  return out;
}

Field omega_of(const ImplicitProblem& p, const Field& v, const SpectralCache& cache) {
  Field omega = nonlinear_part(p, v);
  omega += cache.apply_symbol(v, p.linear_symbol);
  omega += p.e;
  return omega;
}

StepResult solve_implicit(const ImplicitProblem& p, const Field& u_init, double target_mean,
                          const SchemeConfig& cfg, const SpectralCache& cache) {
  const auto residual = [&](const Field& v) {
    Field r = v * p.a;
    r -= laplacian(omega_of(p, v, cache));
    r -= p.b;
    return r;
  };
  const auto jacobian = [&](const Field& at, const Field& d) {
    Field slope = nonlinear_slope(p, at);
    auto sv = slope.values();
    const auto dv = d.values();
    for (std::size_t k = 0; k < sv.size(); ++k) sv[k] *= dv[k];
    slope += cache.apply_symbol(d, p.linear_symbol);
    Field out = d * p.a;
    out -= laplacian(slope);
    return out;
  };

  // Frozen-coefficient operator with the cubic term linearized at zero.
  const double frozen_slope = p.cubic_only ? 0.0 : potential_d2(p.potential, 0.0);
  const auto lam = cache.laplacian_eigenvalues();
  std::vector<double> inverse_symbol(lam.size());
  for (std::size_t m = 0; m < lam.size(); ++m) {
    double den = p.a + lam[m] * (frozen_slope + p.linear_symbol[m]);
    if (std::fabs(den) < 1e-3 * p.a) den = den < 0.0 ? -1e-3 * p.a : 1e-3 * p.a;
    inverse_symbol[m] = 1.0 / den;
  }
  const auto precond = [&](const Field&, const Field& r) {
    return cache.apply_symbol(r, inverse_symbol);
  };

  // Rounding floor of the residual evaluation.
  const Field omega0 = omega_of(p, u_init, cache);
  const double scale = norm2(u_init * p.a) + norm2(p.b) + norm2(laplacian(omega0));
  NewtonOptions opts;
  opts.tol = std::max(cfg.newton_tol, 32.0 * std::numeric_limits<double>::epsilon() * scale);
  opts.max_iter = cfg.newton_max_iter;
  opts.krylov_tol = cfg.krylov_tol;

  NewtonResult nr = newton_solve(residual, jacobian, precond, u_init, opts);
  restore_mean(nr.solution, target_mean);
  StepResult out{nr.solution, omega_of(p, nr.solution, cache), nr.iterations, 0.0};
  out.residual = norm2(residual(out.u_next));
  return out;
}

double difference_residual(const Field& time_derivative, const Field& omega) {
  return norm2(time_derivative - laplacian(omega));
}

const Field& require_prev(const SchemeState& state, Scheme scheme) {
  if (!state.u_prev) {
    throw StateError(std::string(to_string(scheme)) +
                     " needs the previous time level u_prev (bootstrap with a one-step scheme)");
  }
  require_same_geometry(state.u_prev->geometry(), state.u_curr.geometry(), "u_prev");
  return *state.u_prev;
}

StepResult ssi1_with(const SchemeState& state, const SchemeConfig& cfg, double stabilization,
                     const SampledKernel& kernel, const SpectralCache& cache) {
  const Field& u = state.u_curr;
  const double tau = cfg.tau;
  const Field fprime = potential_d1(cfg.potential, u);
  const std::vector<double> ell = nonlocal_symbol(kernel, cfg.epsilon);
  const auto lam = cache.laplacian_eigenvalues();

  const Spectrum u_hat = cache.forward(u);
  const Spectrum f_hat = cache.forward(fprime);
  Spectrum next(u.geometry());
  for (std::size_t m = 0; m < lam.size(); ++m) {
    if (m == 0) {
      next.modes()[0] = u_hat.modes()[0];
      continue;
    }
    const double den = 1.0 / tau + lam[m] * (stabilization + ell[m]);
    if (!(den > 0.0)) throw ConfigError("scheme.S", "non-positive modal denominator in SSI1 solve");
    next.modes()[m] =
        (u_hat.modes()[m] / tau - lam[m] * (f_hat.modes()[m] - stabilization * u_hat.modes()[m])) /
        den;
  }
  Field u_next = cache.inverse(next);
  restore_mean(u_next, mean(u));

  Field omega = fprime;
  omega += (u_next - u) * stabilization;
  omega += cache.apply_symbol(u_next, ell);
  StepResult out{u_next, omega, 0, 0.0};
  out.residual = difference_residual((u_next - u) * (1.0 / tau), omega);
  return out;
}

void apply_policy(const SolvabilityReport& report, const SchemeConfig& cfg) {
  if (report.admissible || cfg.stability_policy == StabilityPolicy::ignore) return;
  std::ostringstream msg;
  msg << to_string(cfg.scheme) << " with tau=" << cfg.tau
      << " fails the solvability/stability check (margin " << report.margin << "): "
      << report.detail;
  if (cfg.stability_policy == StabilityPolicy::enforce) {
    throw StabilityError(msg.str(), report.margin);
  }
  std::cerr << "warning: " << msg.str() << "\n";
}

StepResult step_backward_euler_unchecked(const SchemeState& state, const SchemeConfig& cfg,
                                         const SampledKernel& kernel,
                                         const SpectralCache& cache) {
  const Field& u = state.u_curr;
  ImplicitProblem p{1.0 / cfg.tau, u * (1.0 / cfg.tau), Field(u.geometry()),
                    nonlocal_symbol(kernel, cfg.epsilon), false, cfg.potential};
  return solve_implicit(p, u, mean(u), cfg, cache);
}

StepResult step_convex_splitting_unchecked(const SchemeState& state, const SchemeConfig& cfg,
                                           const SampledKernel& kernel,
                                           const SpectralCache& cache) {
  const Field& u = state.u_curr;
  const double e2c = cfg.epsilon * cfg.epsilon * kernel.conv_one();
  // Explicit concave part: -u - eps^2[J*1]u - eps^2[J*u].
  Field e = u * (-(1.0 + e2c));
  e -= convolve(kernel, u, cache) * (cfg.epsilon * cfg.epsilon);
  std::vector<double> implicit_symbol(cache.geometry().cells(), 2.0 * e2c);
  ImplicitProblem p{1.0 / cfg.tau, u * (1.0 / cfg.tau), std::move(e), std::move(implicit_symbol),
                    true, cfg.potential};
  return solve_implicit(p, u, mean(u), cfg, cache);
}

StepResult step_bdf2_unchecked(const SchemeState& state, const SchemeConfig& cfg,
                               const SampledKernel& kernel, const SpectralCache& cache) {
  const Field& u = state.u_curr;
  const Field& u_prev = require_prev(state, Scheme::bdf2);
  const double tau = cfg.tau;
  Field b = u * (4.0 / (2.0 * tau));
  b -= u_prev * (1.0 / (2.0 * tau));
  ImplicitProblem p{3.0 / (2.0 * tau), std::move(b), Field(u.geometry()),
                    nonlocal_symbol(kernel, cfg.epsilon), false, cfg.potential};
  return solve_implicit(p, u, mean(u), cfg, cache);
}

StepResult step_2li_unchecked(const SchemeState& state, const SchemeConfig& cfg,
                              const SampledKernel& kernel, const SpectralCache& cache) {
  const Field& u = state.u_curr;
  const Field& u_prev = require_prev(state, Scheme::two_li);
  const double tau = cfg.tau;
  Field extrapolated = potential_d1(cfg.potential, u) * 2.0;
  extrapolated -= potential_d1(cfg.potential, u_prev);
  const std::vector<double> ell = nonlocal_symbol(kernel, cfg.epsilon);
  const auto lam = cache.laplacian_eigenvalues();

  const Spectrum u_hat = cache.forward(u);
  const Spectrum prev_hat = cache.forward(u_prev);
  const Spectrum g_hat = cache.forward(extrapolated);
  Spectrum next(u.geometry());
  for (std::size_t m = 0; m < lam.size(); ++m) {
    if (m == 0) {
      next.modes()[0] = u_hat.modes()[0];
      continue;
    }
    const double den = 3.0 / (2.0 * tau) + lam[m] * ell[m];
    if (!(den > 0.0)) throw ConfigError("model", "non-positive modal denominator in 2LI solve");
    next.modes()[m] = ((4.0 * u_hat.modes()[m] - prev_hat.modes()[m]) / (2.0 * tau) -
                       lam[m] * g_hat.modes()[m]) /
                      den;
  }
  Field u_next = cache.inverse(next);
  restore_mean(u_next, mean(u));

  Field omega = extrapolated;
  omega += cache.apply_symbol(u_next, ell);
  Field rate = u_next * 3.0;
  rate -= u * 4.0;
  rate += u_prev;
  rate *= 1.0 / (2.0 * tau);
  StepResult out{u_next, omega, 0, 0.0};
  out.residual = difference_residual(rate, omega);
  return out;
}

StepResult dispatch(Scheme scheme, const SchemeState& state, const SchemeConfig& cfg,
                    const SampledKernel& kernel, const SpectralCache& cache) {
  switch (scheme) {
    case Scheme::backward_euler: return step_backward_euler_unchecked(state, cfg, kernel, cache);
    case Scheme::convex_splitting:
      return step_convex_splitting_unchecked(state, cfg, kernel, cache);
    case Scheme::ssi1: return ssi1_with(state, cfg, cfg.stabilization, kernel, cache);
    case Scheme::bdf2: return step_bdf2_unchecked(state, cfg, kernel, cache);
    case Scheme::two_li: return step_2li_unchecked(state, cfg, kernel, cache);
  }
  throw Error("unknown scheme");
}

void check_inputs(const SchemeState& state, const SchemeConfig& cfg, const SampledKernel& kernel,
                  const SpectralCache& cache) {
  cfg.validate();
  require_same_geometry(state.u_curr.geometry(), cache.geometry(), "scheme state");
  require_same_geometry(kernel.geometry(), cache.geometry(), "kernel");
}

StepResult checked_step(Scheme scheme, const SchemeState& state, const SchemeConfig& cfg,
                        const SampledKernel& kernel, const SpectralCache& cache) {
  SchemeConfig local = cfg;
  local.scheme = scheme;
  check_inputs(state, local, kernel, cache);
  apply_policy(check_solvability(local, kernel, cache), local);
  return dispatch(scheme, state, local, kernel, cache);
}

}  // namespace

StepResult step_backward_euler(const SchemeState& state, const SchemeConfig& cfg,
                               const SampledKernel& kernel, const SpectralCache& cache) {
  return checked_step(Scheme::backward_euler, state, cfg, kernel, cache);
}

StepResult step_convex_splitting(const SchemeState& state, const SchemeConfig& cfg,
                                 const SampledKernel& kernel, const SpectralCache& cache) {
  return checked_step(Scheme::convex_splitting, state, cfg, kernel, cache);
}

StepResult step_ssi1(const SchemeState& state, const SchemeConfig& cfg,
                     const SampledKernel& kernel, const SpectralCache& cache) {
  return checked_step(Scheme::ssi1, state, cfg, kernel, cache);
}

StepResult step_bdf2(const SchemeState& state, const SchemeConfig& cfg,
                     const SampledKernel& kernel, const SpectralCache& cache) {
  require_prev(state, Scheme::bdf2);
  return checked_step(Scheme::bdf2, state, cfg, kernel, cache);
}

StepResult step_2li(const SchemeState& state, const SchemeConfig& cfg,
                    const SampledKernel& kernel, const SpectralCache& cache) {
  require_prev(state, Scheme::two_li);
  return checked_step(Scheme::two_li, state, cfg, kernel, cache);
}

SolvabilityReport check_solvability(const SchemeConfig& cfg, const SampledKernel& kernel,
                                    const SpectralCache& cache) {
  SolvabilityReport r;
  r.conv_one = kernel.conv_one();
  r.gamma0 = gamma0(kernel, cfg.epsilon);
  r.beta = cfg.potential.beta();
  r.stabilization = cfg.stabilization;
  r.per_mode_min = std::numeric_limits<double>::infinity();

  std::ostringstream failures;
  r.margin = r.gamma0;
  bool ok = r.gamma0 > 0.0;
  if (!ok) failures << "gamma0 = " << r.gamma0 << " <= 0; ";

  double c_s = 0.0;
  double offset = 1.0;
  switch (cfg.scheme) {
    case Scheme::backward_euler: c_s = 1.0; break;
    case Scheme::bdf2: c_s = 2.0 / 3.0; break;
    case Scheme::two_li:
      c_s = 2.0 / 3.0;
      offset = 3.0 * r.beta;
      break;
    default: break;
  }

  if (c_s > 0.0) {
    const auto lam = cache.laplacian_eigenvalues();
    const std::vector<double> ell = nonlocal_symbol(kernel, cfg.epsilon);
    for (std::size_t m = 1; m < lam.size(); ++m) {
      const double q = 1.0 / (c_s * cfg.tau * lam[m]) + ell[m] - offset;
      r.per_mode_min = std::min(r.per_mode_min, q);
    }
    r.margin = std::min(r.margin, r.per_mode_min);
    if (!(r.per_mode_min > 0.0)) {
      ok = false;
      failures << "per-mode minimum " << r.per_mode_min << " <= 0 (tau too large); ";
    }
  }
  if (cfg.scheme == Scheme::ssi1) {
    const double slack = cfg.stabilization - 0.5 * r.beta;
    r.margin = std::min(r.margin, slack);
    if (!(slack >= 0.0)) {
      ok = false;
      failures << "S = " << cfg.stabilization << " < beta/2 = " << 0.5 * r.beta << "; ";
    }
  }
  if (cfg.scheme == Scheme::two_li) {
    const double slack = (r.gamma0 + 1.0) / 3.0 - r.beta;
    r.margin = std::min(r.margin, slack);
    if (!(slack >= 0.0)) {
      ok = false;
      failures << "beta = " << r.beta << " > (gamma0+1)/3 = " << (r.gamma0 + 1.0) / 3.0 << "; ";
    }
  }
  if (cfg.cj) {
    const double e4 = std::pow(cfg.epsilon, 4);
    if (cfg.scheme == Scheme::backward_euler || cfg.scheme == Scheme::bdf2) {
      r.cj_tau_bound = 2.0 * r.gamma0 / (*cfg.cj * e4);
    } else if (cfg.scheme == Scheme::two_li) {
      r.cj_tau_bound = 2.0 * (r.gamma0 + 1.0 - 3.0 * r.beta) / (*cfg.cj * e4);
    }
  }
  r.admissible = ok;
  r.detail = failures.str();
  if (!r.detail.empty()) r.detail.resize(r.detail.size() - 2);
  return r;
}

Stepper::Stepper(SchemeConfig cfg, const SampledKernel& kernel, const SpectralCache& cache)
    : cfg_(std::move(cfg)), kernel_(kernel), cache_(cache) {
  cfg_.validate();
  require_same_geometry(kernel.geometry(), cache.geometry(), "kernel");
  report_ = check_solvability(cfg_, kernel_, cache_);
  apply_policy(report_, cfg_);
}

StepResult Stepper::advance(SchemeState& state) const {
  require_same_geometry(state.u_curr.geometry(), cache_.geometry(), "scheme state");
  StepResult step = [&] {
    const bool bootstrap = is_two_step(cfg_.scheme) && (!state.u_prev || state.step_index == 0);
    if (!bootstrap) return dispatch(cfg_.scheme, state, cfg_, kernel_, cache_);
    SchemeState first{state.u_curr, std::nullopt, std::nullopt, state.step_index, state.time};
    if (cfg_.scheme == Scheme::bdf2) {
      return step_backward_euler_unchecked(first, cfg_, kernel_, cache_);
    }
    return ssi1_with(first, cfg_, cfg_.potential.beta(), kernel_, cache_);
  }();
  state.u_prev = std::move(state.u_curr);
  state.u_curr = step.u_next;
  state.omega_last = step.omega_next;
  state.step_index += 1;
  state.time += cfg_.tau;
  return step;
}

}  // namespace nch
