#include "nch/kernel.hpp"

#include <cmath>
#include <string>

#include "nch/errors.hpp"

namespace nch {

void KernelParams::validate() const {
  if (images < 0) throw ConfigError("kernel.images", "must be non-negative");
  if (const auto* g = std::get_if<GaussianKernel>(&shape)) {
    if (!(g->amplitude > 0.0) || !std::isfinite(g->amplitude)) {
      throw ConfigError("kernel.cJ", "Gaussian amplitude must be positive");
    }
    if (!(g->decay > 0.0) || !std::isfinite(g->decay)) {
      throw ConfigError("kernel.xi", "Gaussian decay rate must be positive");
    }
  } else if (const auto* c = std::get_if<ConstantKernel>(&shape)) {
    if (!(c->value > 0.0) || !std::isfinite(c->value)) {
      throw ConfigError("kernel.cJ", "constant kernel value must be positive");
    }
  } else {
    const auto& t = std::get<TabulatedKernel>(shape);
    if (t.n < 2 || t.values.size() != static_cast<std::size_t>(t.n) * t.n) {
      throw ConfigError("kernel.path", "tabulated kernel must hold N*N values");
    }
    for (double v : t.values) {
      if (!std::isfinite(v)) throw ConfigError("kernel.path", "tabulated kernel has non-finite values");
    }
  }
}

SampledKernel::SampledKernel(const GridGeometry& geometry, std::vector<double> stamp,
                             double conv_one, std::vector<double> symbol)
    : geometry_(geometry),
      stamp_(std::move(stamp)),
      conv_one_(conv_one),
      symbol_(std::move(symbol)) {}

namespace {

std::vector<double> raw_samples(const KernelParams& params, const GridGeometry& g) {
  const int n = g.n();
  const double h = g.h();
  const double len = g.length();
  std::vector<double> out(g.cells());

  if (const auto* gauss = std::get_if<GaussianKernel>(&params.shape)) {
    for (int k = 0; k < n; ++k) {
      // Centered displacement in (-L/2, L/2].
      const double dx = (2 * k <= n) ? k * h : k * h - len;
      for (int l = 0; l < n; ++l) {
        const double dy = (2 * l <= n) ? l * h : l * h - len;
        CompensatedSum acc;
        for (int s = -params.images; s <= params.images; ++s) {
          for (int t = -params.images; t <= params.images; ++t) {
            const double x = dx + s * len;
            const double y = dy + t * len;
            acc.add(gauss->amplitude * std::exp(-gauss->decay * (x * x + y * y)));
          }
        }
        out[g.index(k, l)] = acc.value();
      }
    }
  } else if (const auto* c = std::get_if<ConstantKernel>(&params.shape)) {
    std::fill(out.begin(), out.end(), c->value);
  } else {
    const auto& t = std::get<TabulatedKernel>(params.shape);
    if (t.n != n) {
      throw ConfigError("kernel.path", "tabulated kernel has N=" + std::to_string(t.n) +
                                           " but the grid has N=" + std::to_string(n));
    }
    out = t.values;
  }
  return out;
}

}  // namespace

SampledKernel sample_kernel(const KernelParams& params, const SpectralCache& cache) {
  params.validate();
  const GridGeometry& g = cache.geometry();
  const std::vector<double> raw = raw_samples(params, g);

  std::vector<double> stamp(raw.size());
  for (int k = 0; k < g.n(); ++k) {
    for (int l = 0; l < g.n(); ++l) {
      stamp[g.index(k, l)] = 0.5 * (raw[g.index(k, l)] + raw[g.index(-k, -l)]);
    }
  }

  const double h2 = g.h() * g.h();
  CompensatedSum acc;
  for (double v : stamp) acc.add(v);
  const double conv_one = h2 * acc.value();

  Field scaled(g, stamp);
  scaled *= h2;
  const Spectrum modes = cache.forward(scaled);
  std::vector<double> symbol(stamp.size());
  double residue = 0.0;
  const double scale = std::max(std::fabs(conv_one), 1e-300);
  for (std::size_t m = 0; m < symbol.size(); ++m) {
    symbol[m] = modes.modes()[m].real();
    residue = std::max(residue, std::fabs(modes.modes()[m].imag()) / scale);
  }
  symbol[0] = conv_one;

  SampledKernel out(g, std::move(stamp), conv_one, std::move(symbol));
  out.imag_residue_ = residue;
  return out;
}

Field convolve(const SampledKernel& kernel, const Field& phi, const SpectralCache& cache) {
  require_same_geometry(kernel.geometry(), phi.geometry(), "convolve");
  return cache.apply_symbol(phi, kernel.symbol());
}

double gamma0(const SampledKernel& kernel, double epsilon) {
  return epsilon * epsilon * kernel.conv_one() - 1.0;
}

Field nonlocal_operator(const SampledKernel& kernel, double epsilon, const Field& phi,
                        const SpectralCache& cache) {
  require_same_geometry(kernel.geometry(), phi.geometry(), "nonlocal_operator");
  const auto sym = kernel.symbol();
  std::vector<double> multiplier(sym.size());
  const double e2 = epsilon * epsilon;
  for (std::size_t m = 0; m < sym.size(); ++m) multiplier[m] = e2 * (kernel.conv_one() - sym[m]);
  multiplier[0] = 0.0;
  return cache.apply_symbol(phi, multiplier);
}

}  // namespace nch
