#pragma once

#include "nch/field.hpp"
#include "nch/kernel.hpp"
#include "nch/spectral.hpp"

namespace nch {

/// Double-well F(r) = (r^2-1)^2/4, or its C^2 truncation F_K which grows
/// quadratically outside [-K, K].
class PotentialParams {
 public:
  enum class Kind { double_well, truncated };

  static PotentialParams double_well() { return PotentialParams(Kind::double_well, 0.0); }
  /// Throws ConfigError unless K > 1.
  static PotentialParams truncated(double k);

  Kind kind() const { return kind_; }
  double truncation() const { return k_; }
  /// sup |F_K''| = 3K^2 - 1 (truncated only; 0 for the plain double well).
  double beta() const { return kind_ == Kind::truncated ? 3.0 * k_ * k_ - 1.0 : 0.0; }

  bool operator==(const PotentialParams&) const = default;

 private:
  PotentialParams(Kind kind, double k) : kind_(kind), k_(k) {}
  Kind kind_;
  double k_;
};

double potential_value(const PotentialParams& params, double r);
double potential_d1(const PotentialParams& params, double r);
double potential_d2(const PotentialParams& params, double r);

/// Pointwise F'(u).
Field potential_d1(const PotentialParams& params, const Field& u);

/// Nonlocal model data shared by the energy, the chemical potential and the
/// steppers.
struct Model {
  const SampledKernel& kernel;
  double epsilon;
  PotentialParams potential;
  const SpectralCache& cache;
};

/// E_h(u) = h^2(F(u)||1) + eps^2[J*1]/2 ||u||^2 - eps^2/2 h^2(u||[J*u]).
double energy(const Field& u, const SampledKernel& kernel, double epsilon,
              const PotentialParams& potential, const SpectralCache& cache);
double energy(const Field& u, const Model& model);

/// E_h(u_new) - E_h(u_old) assembled from differences, without cancelling
/// two O(1) energies.
double energy_difference(const Field& u_new, const Field& u_old, const Model& model);

/// F'(u) + eps^2[J*1]u - eps^2[J*u]
Field chemical_potential(const Field& u, const Model& model);

/// E_h(u) + ||du||_{-1}^2 / (4 tau). du must be zero-mean.
double modified_energy_bdf2(const Field& u, const Field& du, double tau, const Model& model);

/// E_{K,h}(u) + beta/2 ||du||_2^2 + ||du||_{-1}^2 / (4 tau).
double modified_energy_2li(const Field& u, const Field& du, double tau, double beta,
                           const Model& model);

}  // namespace nch
