#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "frozen_values.hpp"
#include "nch/energy.hpp"
#include "nch/errors.hpp"
#include "nch/oracle/dense.hpp"
#include "support.hpp"

using namespace nch;
using nch::test::gaussian;
using nch::test::random_field;

namespace {

constexpr double kPi = std::numbers::pi;

struct Problem {
  GridGeometry g;
  SpectralCache cache;
  SampledKernel kernel;
  double epsilon;

  Problem(int n, double xi, double eps)
      : g(n, 1.0), cache(g), kernel(sample_kernel(gaussian(1.0, xi), cache)), epsilon(eps) {}

  Model model(PotentialParams p = PotentialParams::double_well()) const {
    return Model{kernel, epsilon, p, cache};
  }
};

Field zero_mean_random(const GridGeometry& g, std::mt19937_64& gen, double amplitude = 1.0) {
  return project_zero_mean(random_field(g, gen, amplitude));
}

}  // namespace

TEST(Potential, DoubleWellValues) {
  const auto p = PotentialParams::double_well();
  EXPECT_EQ(potential_value(p, 1.0), 0.0);
  EXPECT_EQ(potential_value(p, -1.0), 0.0);
  EXPECT_EQ(potential_value(p, 0.0), 0.25);
  EXPECT_EQ(potential_d1(p, 0.0), 0.0);
  EXPECT_EQ(potential_d2(p, 0.0), -1.0);
  EXPECT_EQ(p.beta(), 0.0);
}

TEST(Potential, TruncationRequiresKAboveOne) {
  EXPECT_THROW(PotentialParams::truncated(1.0), ConfigError);
  EXPECT_THROW(PotentialParams::truncated(0.5), ConfigError);
  EXPECT_THROW(PotentialParams::truncated(INFINITY), ConfigError);
  EXPECT_DOUBLE_EQ(PotentialParams::truncated(2.0).beta(), 11.0);
}

TEST(Potential, TruncatedBranchesAgreeAtK) {
  for (double k : {1.5, 2.0, 5.0}) {
    const auto p = PotentialParams::truncated(k);
    const auto w = PotentialParams::double_well();
    // Outer branch evaluated exactly at +-K (just past the switch) against the inner one.
    for (double s : {1.0, -1.0}) {
      const double edge = s * k;
      const double outside = std::nextafter(edge, s * INFINITY);
      EXPECT_NEAR(potential_value(p, outside), potential_value(w, edge), 1e-12 * (1 + k * k * k * k));
      EXPECT_NEAR(potential_d1(p, outside), potential_d1(w, edge), 1e-12 * (1 + k * k * k));
      EXPECT_NEAR(potential_d2(p, outside), potential_d2(w, edge), 1e-12 * (1 + k * k));
      EXPECT_NEAR(potential_value(p, edge), 0.25 * (k * k - 1) * (k * k - 1), 1e-12 * k * k * k * k);
    }
  }
}

TEST(Potential, TruncatedSecondDerivativeBound) {
  const auto p = PotentialParams::truncated(2.0);
  double max_d2 = 0.0;
  const int samples = 1000000;
  for (int i = 0; i < samples; ++i) {
    const double r = -10.0 + 20.0 * i / (samples - 1);
    max_d2 = std::max(max_d2, std::fabs(potential_d2(p, r)));
  }
  EXPECT_DOUBLE_EQ(max_d2, frozen::kMaxFK2ndDerivativeK2);
  EXPECT_DOUBLE_EQ(max_d2, p.beta());
}

TEST(Potential, DerivativesMatchFiniteDifferences) {
  for (const auto p : {PotentialParams::double_well(), PotentialParams::truncated(1.3)}) {
    for (double r : {-2.0, -0.7, 0.1, 0.9, 1.8}) {
      const double d = 1e-6;
      EXPECT_NEAR((potential_value(p, r + d) - potential_value(p, r - d)) / (2 * d),
                  potential_d1(p, r), 1e-7);
      EXPECT_NEAR((potential_d1(p, r + d) - potential_d1(p, r - d)) / (2 * d), potential_d2(p, r),
                  1e-6);
    }
  }
}

TEST(Energy, ConstantFieldHasOnlyPotential) {
  const Problem s(16, 10.0, 2.0);
  for (double c : {-1.3, 0.0, 0.4, 1.0}) {
    const double e = energy(Field(s.g, c), s.model());
    EXPECT_NEAR(e, s.g.area() * potential_value(PotentialParams::double_well(), c), 1e-13);
  }
  EXPECT_NEAR(energy(Field(s.g), s.model()), 0.25, 1e-15);
}

TEST(Energy, MatchesFrozenOracle) {
  const Problem s(8, 10.0, 2.0);
  const Field u = Field::from_function(s.g, [](double x, double y) {
    return 0.5 * std::cos(2 * kPi * x) + 0.3 * std::sin(2 * kPi * y);
  });
  EXPECT_NEAR(energy(u, s.model()), frozen::kEnergyN8, 1e-13);
}

TEST(Energy, MatchesNaiveOracle) {
  const Problem s(8, 10.0, 2.0);
  std::mt19937_64 gen(3);
  for (const auto p : {PotentialParams::double_well(), PotentialParams::truncated(1.2)}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Field u = random_field(s.g, gen, 1.5);
      const double fast = energy(u, s.model(p));
      const double naive = oracle::naive_energy(u, s.kernel, s.epsilon, p);
      EXPECT_NEAR(fast, naive, 1e-12 * std::fabs(naive));
    }
  }
}

TEST(Energy, LowerBound) {
  const Problem s(16, 10.0, 2.0);
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const Field u = random_field(s.g, gen, 2.0 * (trial % 5 + 1) / 5.0);
    const double l2 = norm2(u);
    EXPECT_GE(energy(u, s.model()), 0.5 * l2 * l2 - 0.75 * s.g.area());
  }
}

TEST(Energy, VariationalDerivativeByFiniteDifferences) {
  const Problem s(8, 10.0, 2.0);
  std::mt19937_64 gen(5);
  const Field u = random_field(s.g, gen);
  const Model m = s.model();
  const Field mu = chemical_potential(u, m);
  const double h2 = s.g.h() * s.g.h();
  const double d = 1e-5;
  for (int i = 0; i < s.g.n(); i += 3) {
    for (int j = 0; j < s.g.n(); j += 2) {
      Field plus = u, minus = u;
      plus(i, j) += d;
      minus(i, j) -= d;
      const double fd = (energy(plus, m) - energy(minus, m)) / (2 * d * h2);
      EXPECT_NEAR(fd, mu(i, j), 1e-6);
    }
  }
}

TEST(Energy, ChemicalPotentialOfConstant) {
  const Problem s(8, 10.0, 2.0);
  const Field mu = chemical_potential(Field(s.g, 0.3), s.model());
  const double expected = potential_d1(PotentialParams::double_well(), 0.3);
  for (double v : mu.values()) EXPECT_NEAR(v, expected, 1e-15);
}

TEST(Energy, DifferenceAgreesWithSubtraction) {
  const Problem s(16, 10.0, 2.0);
  std::mt19937_64 gen(6);
  const Model m = s.model();
  const Field a = random_field(s.g, gen);
  Field b = a;
  b(3, 4) += 1e-3;
  b(7, 1) -= 2e-3;
  EXPECT_NEAR(energy_difference(b, a, m), energy(b, m) - energy(a, m), 1e-14);
  EXPECT_EQ(energy_difference(a, a, m), 0.0);
  // Tiny perturbation: the difference form keeps digits the subtraction loses.
  Field c = a;
  c(2, 2) += 1e-9;
  const double h2 = s.g.h() * s.g.h();
  const double predicted = h2 * chemical_potential(a, m)(2, 2) * 1e-9;
  EXPECT_NEAR(energy_difference(c, a, m), predicted, 1e-6 * std::fabs(predicted));
}

TEST(ModifiedEnergy, ZeroIncrementGivesEnergy) {
  const Problem s(16, 10.0, 2.0);
  std::mt19937_64 gen(7);
  const Field u = random_field(s.g, gen);
  const auto pk = PotentialParams::truncated(1.1);
  EXPECT_EQ(modified_energy_bdf2(u, Field(s.g), 0.1, s.model()), energy(u, s.model()));
  EXPECT_EQ(modified_energy_2li(u, Field(s.g), 0.1, pk.beta(), s.model(pk)),
            energy(u, s.model(pk)));
}

TEST(ModifiedEnergy, TauScalingAndRecomposition) {
  const Problem s(16, 10.0, 2.0);
  std::mt19937_64 gen(8);
  const Model m = s.model();
  const Field u = random_field(s.g, gen);
  const Field du = zero_mean_random(s.g, gen, 0.1);
  const double e = energy(u, m);
  const double inc1 = modified_energy_bdf2(u, du, 0.1, m) - e;
  const double inc2 = modified_energy_bdf2(u, du, 0.2, m) - e;
  EXPECT_NEAR(inc2, 0.5 * inc1, 1e-14 * inc1 + 4 * std::numeric_limits<double>::epsilon() * e);
  const double nn = norm_neg1(du, s.cache);
  EXPECT_NEAR(modified_energy_bdf2(u, du, 0.1, m), e + nn * nn / 0.4, 1e-14);

  const auto pk = PotentialParams::truncated(1.1);
  const Model mk = s.model(pk);
  const double l2 = norm2(du);
  EXPECT_NEAR(modified_energy_2li(u, du, 0.1, pk.beta(), mk),
              energy(u, mk) + pk.beta() / 2 * l2 * l2 + nn * nn / 0.4, 1e-14);
  EXPECT_NEAR(modified_energy_2li(u, du, 0.1, 0.0, mk), modified_energy_bdf2(u, du, 0.1, mk),
              1e-15);
}

TEST(ModifiedEnergy, RejectsMassCarryingIncrement) {
  const Problem s(8, 10.0, 2.0);
  const Field du(s.g, 0.01);
  EXPECT_THROW(modified_energy_bdf2(Field(s.g), du, 0.1, s.model()), PreconditionError);
}
