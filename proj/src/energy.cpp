#include "nch/energy.hpp"

#include <cmath>

#include "nch/errors.hpp"

namespace nch {

PotentialParams PotentialParams::truncated(double k) {
  if (!(k > 1.0) || !std::isfinite(k)) {
    throw ConfigError("potential.K", "truncation K must be finite and > 1");
  }
  return PotentialParams(Kind::truncated, k);
}

double potential_value(const PotentialParams& params, double r) {
  if (params.kind() == PotentialParams::Kind::truncated) {
    const double k = params.truncation();
    if (r > k || r < -k) {
      const double sign = r > 0.0 ? 1.0 : -1.0;
      return 0.5 * (3.0 * k * k - 1.0) * r * r - sign * 2.0 * k * k * k * r +
             0.25 * (3.0 * k * k * k * k + 1.0);
    }
  }
  const double s = r * r - 1.0;
  return 0.25 * s * s;
}

double potential_d1(const PotentialParams& params, double r) {
  if (params.kind() == PotentialParams::Kind::truncated) {
    const double k = params.truncation();
    if (r > k) return (3.0 * k * k - 1.0) * r - 2.0 * k * k * k;
    if (r < -k) return (3.0 * k * k - 1.0) * r + 2.0 * k * k * k;
  }
  return r * r * r - r;
}

double potential_d2(const PotentialParams& params, double r) {
  if (params.kind() == PotentialParams::Kind::truncated) {
    const double k = params.truncation();
    if (r > k || r < -k) return 3.0 * k * k - 1.0;
  }
  return 3.0 * r * r - 1.0;
}

Field potential_d1(const PotentialParams& params, const Field& u) {
  Field out(u.geometry());
  auto dst = out.values();
  const auto src = u.values();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = potential_d1(params, src[k]);
  return out;
}

double energy(const Field& u, const SampledKernel& kernel, double epsilon,
              const PotentialParams& potential, const SpectralCache& cache) {
  return energy(u, Model{kernel, epsilon, potential, cache});
}

double energy(const Field& u, const Model& model) {
  require_same_geometry(u.geometry(), model.kernel.geometry(), "energy");
  const double h = u.geometry().h();
  CompensatedSum bulk;
  for (double v : u.values()) bulk.add(potential_value(model.potential, v));
  const Field lu = nonlocal_operator(model.kernel, model.epsilon, u, model.cache);
  return h * h * (bulk.value() + 0.5 * inner_product(u, lu));
}

double energy_difference(const Field& u_new, const Field& u_old, const Model& model) {
  require_same_geometry(u_new.geometry(), u_old.geometry(), "energy_difference");
  const double h = u_new.geometry().h();
  const auto a = u_new.values();
  const auto b = u_old.values();
  CompensatedSum bulk;
  const bool plain = model.potential.kind() == PotentialParams::Kind::double_well;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (plain) {
      // (a^2-1)^2 - (b^2-1)^2 = (a-b)(a+b)(a^2+b^2-2)
      bulk.add(0.25L * (static_cast<long double>(a[k]) - b[k]) *
               (static_cast<long double>(a[k]) + b[k]) *
               (static_cast<long double>(a[k]) * a[k] + static_cast<long double>(b[k]) * b[k] -
                2.0L));
    } else {
      bulk.add(static_cast<long double>(potential_value(model.potential, a[k])) -
               potential_value(model.potential, b[k]));
    }
  }
  // Symmetry of the nonlocal operator L: (a,La) - (b,Lb) = (a+b, L(a-b)).
  const Field sum = u_new + u_old;
  const Field diff = u_new - u_old;
  const Field ldiff = nonlocal_operator(model.kernel, model.epsilon, diff, model.cache);
  return h * h * (bulk.value() + 0.5 * inner_product(sum, ldiff));
}

Field chemical_potential(const Field& u, const Model& model) {
  Field omega = potential_d1(model.potential, u);
  omega += nonlocal_operator(model.kernel, model.epsilon, u, model.cache);
  return omega;
}

double modified_energy_bdf2(const Field& u, const Field& du, double tau, const Model& model) {
  const double hn = norm_neg1(du, model.cache);
  return energy(u, model) + hn * hn / (4.0 * tau);
}

double modified_energy_2li(const Field& u, const Field& du, double tau, double beta,
                           const Model& model) {
  const double l2 = norm2(du);
  return modified_energy_bdf2(u, du, tau, model) + 0.5 * beta * l2 * l2;
}

}  // namespace nch
