#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "nch/driver.hpp"
#include "nch/field.hpp"
#include "nch/kernel.hpp"
#include "nch/spectral.hpp"
#include "nch/steppers.hpp"

namespace nch::test {

inline Field random_field(const GridGeometry& g, std::mt19937_64& gen, double amplitude = 1.0) {
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  Field f(g);
  for (double& v : f.values()) v = dist(gen);
  return f;
}

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::fabs(v));
  return m;
}

inline double max_abs_diff(const Field& a, const Field& b) { return max_abs(a - b); }

/// Strong nonlocal interaction: eps^2 [J*1] ~ 8.04, gamma0 ~ 7.04; only the
/// |m| = 1 modes are linearly unstable, so random data phase-separates
/// quickly. beta(K = 1.1) = 2.63 <= (gamma0 + 1)/3, so 2LI is admissible
/// for small tau.
struct Reference {
  static constexpr int n = 32;
  static constexpr double length = 1.0;
  static constexpr double epsilon = 16.0;
  static constexpr double amplitude = 1.0;
  static constexpr double decay = 100.0;
  static constexpr double truncation = 1.1;
};

inline KernelParams gaussian(double amplitude, double decay, int images = 3) {
  KernelParams params;
  params.shape = GaussianKernel{amplitude, decay};
  params.images = images;
  return params;
}

inline SchemeConfig reference_config(Scheme scheme, double tau) {
  SchemeConfig cfg;
  cfg.scheme = scheme;
  cfg.tau = tau;
  cfg.epsilon = Reference::epsilon;
  if (is_linear(scheme)) {
    cfg.potential = PotentialParams::truncated(Reference::truncation);
    cfg.stabilization = cfg.potential.beta() / 2.0;
  }
  return cfg;
}

/// Step through the public per-scheme functions.
inline StepResult step(const SchemeState& state, const SchemeConfig& cfg,
                       const SampledKernel& kernel, const SpectralCache& cache) {
  switch (cfg.scheme) {
    case Scheme::backward_euler: return step_backward_euler(state, cfg, kernel, cache);
    case Scheme::convex_splitting: return step_convex_splitting(state, cfg, kernel, cache);
    case Scheme::ssi1: return step_ssi1(state, cfg, kernel, cache);
    case Scheme::bdf2: return step_bdf2(state, cfg, kernel, cache);
    case Scheme::two_li: break;
  }
  return step_2li(state, cfg, kernel, cache);
}

inline constexpr Scheme kAllSchemes[] = {Scheme::backward_euler, Scheme::convex_splitting,
                                         Scheme::ssi1, Scheme::bdf2, Scheme::two_li};

}  // namespace nch::test
