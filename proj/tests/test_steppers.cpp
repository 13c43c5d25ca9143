#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "frozen_values.hpp"
#include "nch/driver.hpp"
#include "nch/errors.hpp"
#include "nch/oracle/dense.hpp"
#include "nch/steppers.hpp"
#include "support.hpp"

using namespace nch;
using nch::test::gaussian;
using nch::test::kAllSchemes;
using nch::test::max_abs;
using nch::test::max_abs_diff;
using nch::test::Reference;
using nch::test::reference_config;

namespace {

constexpr double kPi = std::numbers::pi;

struct Grid {
  GridGeometry g;
  SpectralCache cache;
  SampledKernel kernel;

  Grid(int n, KernelParams params) : g(n, 1.0), cache(g), kernel(sample_kernel(params, cache)) {}
};

const Grid& reference_grid() {
  static const Grid grid(Reference::n, gaussian(Reference::amplitude, Reference::decay));
  return grid;
}

// Mild interaction used by the dense oracles (gamma0 ~ 0.26).
SchemeConfig mild_config(Scheme scheme, double tau = 0.01) {
  SchemeConfig cfg;
  cfg.scheme = scheme;
  cfg.tau = tau;
  cfg.epsilon = 2.0;
  cfg.stability_policy = StabilityPolicy::ignore;
  if (is_linear(scheme)) {
    cfg.potential = PotentialParams::truncated(1.1);
    cfg.stabilization = cfg.potential.beta() / 2;
  }
  return cfg;
}

SchemeState state_of(Field u) {
  return SchemeState{std::move(u), std::nullopt, std::nullopt, 0, 0.0};
}

SchemeState two_level(const Field& prev, const Field& curr) {
  SchemeState s = state_of(curr);
  s.u_prev = prev;
  return s;
}

// The energy each scheme dissipates, evaluated at (u_next, u_next - u).
double scheme_energy(const SchemeConfig& cfg, const Field& u_next, const Field& u, const Model& m) {
  const Field du = project_zero_mean(u_next - u);
  switch (cfg.scheme) {
    case Scheme::bdf2: return modified_energy_bdf2(u_next, du, cfg.tau, m);
    case Scheme::two_li: return modified_energy_2li(u_next, du, cfg.tau, cfg.potential.beta(), m);
    default: return energy(u_next, m);
  }
}

}  // namespace

TEST(Scheme, NamesRoundTrip) {
  for (Scheme s : kAllSchemes) EXPECT_EQ(parse_scheme(to_string(s)), s);
  EXPECT_EQ(parse_scheme("2li"), Scheme::two_li);
  EXPECT_FALSE(parse_scheme("rk4"));
  for (auto p : {StabilityPolicy::enforce, StabilityPolicy::warn, StabilityPolicy::ignore}) {
    EXPECT_EQ(parse_policy(to_string(p)), p);
  }
  EXPECT_FALSE(parse_policy("strict"));
}

TEST(SchemeConfig, Validation) {
  SchemeConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.tau = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SchemeConfig{};
  cfg.epsilon = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SchemeConfig{};
  cfg.stabilization = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SchemeConfig{};
  cfg.krylov_tol = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SchemeConfig{};
  cfg.cj = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);

  cfg = SchemeConfig{};
  cfg.scheme = Scheme::ssi1;
  EXPECT_THROW(cfg.validate(), ConfigError);  // needs F_K
  cfg.potential = PotentialParams::truncated(2.0);
  EXPECT_NO_THROW(cfg.validate());
  cfg.scheme = Scheme::convex_splitting;
  EXPECT_THROW(cfg.validate(), ConfigError);  // needs the double well
  cfg.scheme = Scheme::backward_euler;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Steppers, ConstantDataIsFixedPoint) {
  const Grid& r = reference_grid();
  for (Scheme scheme : kAllSchemes) {
    const SchemeConfig cfg = reference_config(scheme, scheme == Scheme::two_li ? 0.001 : 0.05);
    const Stepper stepper(cfg, r.kernel, r.cache);
    const Field u0(r.g, 0.3);
    SchemeState s = state_of(u0);
    for (int k = 0; k < 10; ++k) stepper.advance(s);
    EXPECT_LE(max_abs_diff(s.u_curr, u0), 1e-13) << to_string(scheme);
    const double expected_omega = potential_d1(cfg.potential, 0.3);
    for (double w : s.omega_last->values()) EXPECT_NEAR(w, expected_omega, 1e-12);
  }
}

TEST(Steppers, TwoStepSchemesNeedHistory) {
  const Grid& r = reference_grid();
  const SchemeState s = state_of(Field(r.g));
  EXPECT_THROW(step_bdf2(s, reference_config(Scheme::bdf2, 0.05), r.kernel, r.cache), StateError);
  EXPECT_THROW(step_2li(s, reference_config(Scheme::two_li, 0.001), r.kernel, r.cache),
               StateError);
}

TEST(Steppers, SchemeEquationsHold) {
  const Grid& r = reference_grid();
  const Field u0 = random_initial_field(r.g, 17);
  for (Scheme scheme : kAllSchemes) {
    const SchemeConfig cfg = reference_config(scheme, scheme == Scheme::two_li ? 0.001 : 0.05);
    // Two-step schemes get a history with a non-trivial increment.
    const SchemeState state =
        is_two_step(scheme) ? two_level(random_initial_field(r.g, 18), u0) : state_of(u0);
    const StepResult out = nch::test::step(state, cfg, r.kernel, r.cache);
    if (is_linear(scheme)) {
      EXPECT_LE(out.residual, 1e-12 * (1 + norm2(laplacian(out.omega_next))))
          << to_string(scheme);
    } else {
      EXPECT_LE(out.residual, cfg.newton_tol) << to_string(scheme);
      EXPECT_GE(out.newton_iters, 1);
    }
    EXPECT_NEAR(mean(out.u_next), mean(u0), 1e-15);
  }
}

TEST(Steppers, BackwardEulerChemicalPotentialDefinition) {
  const Grid& r = reference_grid();
  const Field u0 = random_initial_field(r.g, 5);
  const SchemeConfig cfg = reference_config(Scheme::backward_euler, 0.05);
  const StepResult out = step_backward_euler(state_of(u0), cfg, r.kernel, r.cache);
  const Model m{r.kernel, cfg.epsilon, cfg.potential, r.cache};
  EXPECT_LE(max_abs_diff(out.omega_next, chemical_potential(out.u_next, m)), 1e-12);
}

TEST(Steppers, MatchDenseOracleAtN4) {
  const Grid grid(4, gaussian(1.0, 10.0));
  const Field u0 = Field::from_function(grid.g, [](double x, double y) {
    return 0.6 * std::cos(2 * kPi * x) + 0.2 * std::sin(2 * kPi * (x + y));
  });
  const Field u_prev = Field::from_function(grid.g, [](double x, double y) {
    return 0.55 * std::cos(2 * kPi * x) + 0.25 * std::sin(2 * kPi * (x + y)) +
           0.05 * std::cos(2 * kPi * y);
  });
  for (Scheme scheme : kAllSchemes) {
    const SchemeConfig cfg = mild_config(scheme);
    const SchemeState s = is_two_step(scheme) ? two_level(u_prev, u0) : state_of(u0);
    const StepResult fast = nch::test::step(s, cfg, grid.kernel, grid.cache);
    const oracle::DenseStep dense = oracle::dense_step(s, cfg, grid.kernel);
    const double tol = is_linear(scheme) ? 1e-11 : 1e-9;
    EXPECT_LE(max_abs_diff(fast.u_next, dense.u), tol) << to_string(scheme);
    EXPECT_LE(max_abs_diff(fast.omega_next, dense.omega), 100 * tol) << to_string(scheme);
  }
}

TEST(Steppers, BackwardEulerMatchesFrozenRoot) {
  const Grid grid(4, gaussian(1.0, 10.0));
  const Field u0 = Field::from_function(grid.g, [](double x, double y) {
    return 0.6 * std::cos(2 * kPi * x) + 0.2 * std::sin(2 * kPi * (x + y));
  });
  const SchemeConfig cfg = mild_config(Scheme::backward_euler);
  const StepResult out = step_backward_euler(state_of(u0), cfg, grid.kernel, grid.cache);
  EXPECT_NEAR(out.u_next(0, 0), frozen::kBackwardEulerN4_u00, 1e-11);
  EXPECT_NEAR(out.u_next(1, 2), frozen::kBackwardEulerN4_u12, 1e-11);
  const Model m{grid.kernel, cfg.epsilon, cfg.potential, grid.cache};
  EXPECT_NEAR(energy(out.u_next, m), frozen::kBackwardEulerN4_energy, 1e-12);
}

TEST(Steppers, EnergyDecreasesAlongTrajectories) {
  const Grid& r = reference_grid();
  const Field u0 = random_initial_field(r.g, 42);
  for (Scheme scheme : kAllSchemes) {
    const SchemeConfig cfg = reference_config(scheme, scheme == Scheme::two_li ? 0.001 : 0.05);
    const Stepper stepper(cfg, r.kernel, r.cache);
    const Model m = stepper.model();
    SchemeState s = state_of(u0);
    stepper.advance(s);  // bootstrap for the two-step schemes
    double prev = scheme_energy(cfg, s.u_curr, *s.u_prev, m);
    for (int k = 0; k < 30; ++k) {
      stepper.advance(s);
      const double e = scheme_energy(cfg, s.u_curr, *s.u_prev, m);
      EXPECT_LE(e, prev + 1e-10 * (1 + std::fabs(prev))) << to_string(scheme) << " step " << k;
      prev = e;
    }
  }
}

TEST(Steppers, ConvexSplittingDissipationInequality) {
  const Grid& r = reference_grid();
  const Field u0 = random_initial_field(r.g, 9);
  for (double tau : {0.01, 1.0, 10.0}) {
    const SchemeConfig cfg = reference_config(Scheme::convex_splitting, tau);
    const Model m{r.kernel, cfg.epsilon, cfg.potential, r.cache};
    const StepResult out = step_convex_splitting(state_of(u0), cfg, r.kernel, r.cache);
    const double g = gradient_norm2(out.omega_next);
    const double d = norm2(out.u_next - u0);
    const double lhs = energy(out.u_next, m) + tau * g * g +
                       cfg.epsilon * cfg.epsilon * r.kernel.conv_one() * d * d;
    EXPECT_LE(lhs, energy(u0, m) + 1e-10) << tau;
  }
}

TEST(Steppers, MassIsConserved) {
  const Grid& r = reference_grid();
  const Field u0 = random_initial_field(r.g, 3, 0.2);
  const double h2 = r.g.h() * r.g.h();
  const double mass0 = h2 * mean(u0) * static_cast<double>(r.g.cells());
  for (Scheme scheme : kAllSchemes) {
    const SchemeConfig cfg = reference_config(scheme, scheme == Scheme::two_li ? 0.001 : 0.05);
    const Stepper stepper(cfg, r.kernel, r.cache);
    SchemeState s = state_of(u0);
    for (int k = 0; k < 20; ++k) stepper.advance(s);
    const double mass = h2 * mean(s.u_curr) * static_cast<double>(r.g.cells());
    EXPECT_LE(std::fabs(mass - mass0), 1e-11 * std::fabs(mass0)) << to_string(scheme);
  }
}

TEST(Stepper, BootstrapsWithOneStepSchemes) {
  const Grid& r = reference_grid();
  const Field u0 = random_initial_field(r.g, 8);

  SchemeConfig bdf2 = reference_config(Scheme::bdf2, 0.05);
  SchemeState s = state_of(u0);
  Stepper(bdf2, r.kernel, r.cache).advance(s);
  SchemeConfig be = bdf2;
  be.scheme = Scheme::backward_euler;
  EXPECT_EQ(s.u_curr, step_backward_euler(state_of(u0), be, r.kernel, r.cache).u_next);
  EXPECT_EQ(*s.u_prev, u0);
  EXPECT_EQ(s.step_index, 1);
  EXPECT_DOUBLE_EQ(s.time, 0.05);

  SchemeConfig li = reference_config(Scheme::two_li, 0.001);
  s = state_of(u0);
  Stepper(li, r.kernel, r.cache).advance(s);
  SchemeConfig ssi = li;
  ssi.scheme = Scheme::ssi1;
  ssi.stabilization = li.potential.beta();
  EXPECT_EQ(s.u_curr, step_ssi1(state_of(u0), ssi, r.kernel, r.cache).u_next);
}

TEST(Stepper, EnforcePolicyRejectsInadmissibleSetup) {
  const Grid& r = reference_grid();
  SchemeConfig cfg = reference_config(Scheme::backward_euler, 10.0);
  EXPECT_THROW(Stepper(cfg, r.kernel, r.cache), StabilityError);
  EXPECT_THROW(step_backward_euler(state_of(Field(r.g)), cfg, r.kernel, r.cache), StabilityError);
  cfg.stability_policy = StabilityPolicy::warn;
  EXPECT_NO_THROW(Stepper(cfg, r.kernel, r.cache));
  cfg.stability_policy = StabilityPolicy::ignore;
  EXPECT_FALSE(Stepper(cfg, r.kernel, r.cache).report().admissible);
}

TEST(CheckSolvability, MarginGrowsAsTauShrinks) {
  const Grid& r = reference_grid();
  for (Scheme scheme : {Scheme::backward_euler, Scheme::bdf2, Scheme::two_li}) {
    double prev = -INFINITY;
    for (double tau : {10.0, 1.0, 0.1, 0.01, 1e-3, 1e-4, 1e-6}) {
      const SolvabilityReport rep =
          check_solvability(reference_config(scheme, tau), r.kernel, r.cache);
      EXPECT_GE(rep.per_mode_min, prev) << to_string(scheme);
      prev = rep.per_mode_min;
    }
    EXPECT_GT(prev, 100.0);  // ~ 1/(c_s tau lambda_max)
  }
}

TEST(CheckSolvability, ReferenceAdmissibility) {
  const Grid& r = reference_grid();
  EXPECT_TRUE(check_solvability(reference_config(Scheme::backward_euler, 0.05), r.kernel, r.cache)
                  .admissible);
  EXPECT_TRUE(
      check_solvability(reference_config(Scheme::bdf2, 0.05), r.kernel, r.cache).admissible);
  EXPECT_TRUE(
      check_solvability(reference_config(Scheme::two_li, 0.001), r.kernel, r.cache).admissible);
  EXPECT_FALSE(
      check_solvability(reference_config(Scheme::two_li, 0.005), r.kernel, r.cache).admissible);
  // Convex splitting only needs gamma0 > 0.
  const SolvabilityReport cs =
      check_solvability(reference_config(Scheme::convex_splitting, 1e6), r.kernel, r.cache);
  EXPECT_TRUE(cs.admissible);
  EXPECT_TRUE(std::isinf(cs.per_mode_min));
  EXPECT_NEAR(cs.gamma0, Reference::epsilon * Reference::epsilon * r.kernel.conv_one() - 1, 1e-12);
}

TEST(CheckSolvability, ConstantKernelWithPositiveGammaIsAlwaysAdmissible) {
  KernelParams params;
  params.shape = ConstantKernel{2.0};
  const Grid grid(16, params);
  for (Scheme scheme : {Scheme::backward_euler, Scheme::bdf2}) {
    for (double tau : {1e-3, 1.0, 1e6}) {
      SchemeConfig cfg;
      cfg.scheme = scheme;
      cfg.tau = tau;
      cfg.epsilon = 1.0;
      const SolvabilityReport rep = check_solvability(cfg, grid.kernel, grid.cache);
      EXPECT_TRUE(rep.admissible) << to_string(scheme) << " " << tau;
      EXPECT_NEAR(rep.gamma0, 1.0, 1e-14);
    }
  }
}

TEST(CheckSolvability, SymbolBoundOfNonnegativeKernelIsNotEnough) {
  // Every mode of a nonnegative kernel has Jhat_m <= [J*1], yet a mode with
  // eps^2([J*1] - Jhat_m) < 1 still fails once tau is large enough.
  const Grid& r = reference_grid();
  double worst = INFINITY;
  for (std::size_t m = 1; m < r.g.cells(); ++m) {
    EXPECT_LE(r.kernel.symbol()[m], r.kernel.conv_one() * (1 + 1e-14));
    const double e2 = Reference::epsilon * Reference::epsilon;
    worst = std::min(worst, e2 * (r.kernel.conv_one() - r.kernel.symbol()[m]));
  }
  ASSERT_LT(worst, 1.0);
  const SolvabilityReport rep =
      check_solvability(reference_config(Scheme::backward_euler, 10.0), r.kernel, r.cache);
  EXPECT_GT(rep.gamma0, 0.0);
  EXPECT_FALSE(rep.admissible);
  EXPECT_FALSE(rep.detail.empty());
}

TEST(CheckSolvability, ZeroGammaIsInadmissibleForEveryTau) {
  KernelParams params;
  params.shape = ConstantKernel{1.0};
  const Grid grid(8, params);
  for (Scheme scheme : kAllSchemes) {
    for (double tau : {1e-8, 1e-2, 1.0}) {
      SchemeConfig cfg = mild_config(scheme, tau);
      cfg.epsilon = 1.0;
      const SolvabilityReport rep = check_solvability(cfg, grid.kernel, grid.cache);
      EXPECT_EQ(rep.gamma0, 0.0);
      EXPECT_FALSE(rep.admissible) << to_string(scheme);
    }
  }
}

TEST(CheckSolvability, StabilizationThreshold) {
  const Grid& r = reference_grid();
  SchemeConfig cfg = reference_config(Scheme::ssi1, 1.0);
  cfg.potential = PotentialParams::truncated(2.0);
  cfg.stabilization = cfg.potential.beta() / 2;
  const SolvabilityReport at = check_solvability(cfg, r.kernel, r.cache);
  EXPECT_TRUE(at.admissible);
  EXPECT_EQ(at.margin, 0.0);
  cfg.stabilization = std::nextafter(cfg.potential.beta() / 2, 0.0);
  EXPECT_FALSE(check_solvability(cfg, r.kernel, r.cache).admissible);
}

TEST(CheckSolvability, TwoLevelBetaBound) {
  const Grid& r = reference_grid();
  SchemeConfig cfg = reference_config(Scheme::two_li, 1e-5);
  cfg.potential = PotentialParams::truncated(2.0);  // beta = 11 > (gamma0 + 1) / 3
  const SolvabilityReport rep = check_solvability(cfg, r.kernel, r.cache);
  EXPECT_FALSE(rep.admissible);
  EXPECT_DOUBLE_EQ(rep.beta, 11.0);
}

TEST(CheckSolvability, ReportsLiteralBoundWhenCjGiven) {
  const Grid& r = reference_grid();
  SchemeConfig cfg = reference_config(Scheme::backward_euler, 0.05);
  EXPECT_FALSE(check_solvability(cfg, r.kernel, r.cache).cj_tau_bound);
  cfg.cj = 2.0;
  const SolvabilityReport rep = check_solvability(cfg, r.kernel, r.cache);
  ASSERT_TRUE(rep.cj_tau_bound);
  const double e4 = std::pow(Reference::epsilon, 4);
  EXPECT_NEAR(*rep.cj_tau_bound, 2 * rep.gamma0 / (2.0 * e4), 1e-15);
}
