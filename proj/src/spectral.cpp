#include "nch/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "nch/errors.hpp"

namespace nch {

namespace {

// The FFTW planner is not thread-safe; plan execution with the new-array
// interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

struct SpectralCache::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Plans(int n) {
    std::vector<std::complex<double>> in(static_cast<std::size_t>(n) * n);
    std::vector<std::complex<double>> out(in.size());
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_dft_2d(n, n, as_fftw(in.data()), as_fftw(out.data()), FFTW_FORWARD, flags);
    backward =
        fftw_plan_dft_2d(n, n, as_fftw(in.data()), as_fftw(out.data()), FFTW_BACKWARD, flags);
    if (forward == nullptr || backward == nullptr) throw Error("FFTW planning failed");
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

Spectrum::Spectrum(const GridGeometry& geometry)
    : geometry_(geometry), modes_(geometry.cells()) {}

double laplacian_eigenvalue(const GridGeometry& geometry, int k, int l) {
  // (2/h^2)(2 - cos a - cos b) = (4/h^2)(sin^2(a/2) + sin^2(b/2)); folding
  // k -> min(k, N-k) makes the symbol exactly symmetric under k -> N-k.
  const double h = geometry.h();
  const int n = geometry.n();
  const auto half_angle_sin2 = [&](int k) {
    const int kk = geometry.wrap(k);
    const double s = std::sin(std::numbers::pi * std::min(kk, n - kk) / n);
    return s * s;
  };
  return 4.0 / (h * h) * (half_angle_sin2(k) + half_angle_sin2(l));
}

SpectralCache::SpectralCache(const GridGeometry& geometry)
    : geometry_(geometry),
      eigenvalues_(geometry.cells()),
      plans_(std::make_shared<const Plans>(geometry.n())) {
  const int n = geometry.n();
  lambda_min_positive_ = INFINITY;
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      double lam = laplacian_eigenvalue(geometry, k, l);
      if (k == 0 && l == 0) lam = 0.0;
      eigenvalues_[geometry.index(k, l)] = lam;
      if (lam > 0.0) lambda_min_positive_ = std::min(lambda_min_positive_, lam);
      lambda_max_ = std::max(lambda_max_, lam);
    }
  }
}

std::vector<double> SpectralCache::laplacian_symbol() const {
  std::vector<double> out(eigenvalues_.size());
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = -eigenvalues_[m];
  return out;
}

Spectrum SpectralCache::forward(const Field& phi) const {
  require_same_geometry(geometry_, phi.geometry(), "dft_forward");
  std::vector<std::complex<double>> in(phi.values().begin(), phi.values().end());
  Spectrum out(geometry_);
  fftw_execute_dft(plans_->forward, as_fftw(in.data()), as_fftw(out.modes().data()));
  return out;
}

Field SpectralCache::inverse(const Spectrum& modes) const {
  require_same_geometry(geometry_, modes.geometry(), "dft_inverse");
  std::vector<std::complex<double>> in(modes.modes().begin(), modes.modes().end());
  std::vector<std::complex<double>> out(in.size());
  fftw_execute_dft(plans_->backward, as_fftw(in.data()), as_fftw(out.data()));
  Field result(geometry_);
  const double scale = 1.0 / static_cast<double>(geometry_.cells());
  auto values = result.values();
  for (std::size_t k = 0; k < out.size(); ++k) values[k] = out[k].real() * scale;
  return result;
}

Field SpectralCache::apply_symbol(const Field& phi, std::span<const double> multiplier) const {
  Spectrum modes = forward(phi);
  auto m = modes.modes();
  for (std::size_t k = 0; k < m.size(); ++k) m[k] *= multiplier[k];
  return inverse(modes);
}

Spectrum dft_forward(const Field& phi, const SpectralCache& cache) { return cache.forward(phi); }

Field dft_inverse(const Spectrum& modes, const SpectralCache& cache) {
  return cache.inverse(modes);
}

EdgeField gradient(const Field& phi) {
  const GridGeometry& g = phi.geometry();
  EdgeField out(g);
  const double inv_h = 1.0 / g.h();
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      out.x(i, j) = (phi(i + 1, j) - phi(i, j)) * inv_h;
      out.y(i, j) = (phi(i, j + 1) - phi(i, j)) * inv_h;
    }
  }
  return out;
}

Field divergence(const EdgeField& f) {
  const GridGeometry& g = f.geometry();
  Field out(g);
  const double inv_h = 1.0 / g.h();
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      out(i, j) = (f.x(i, j) - f.x(i - 1, j)) * inv_h + (f.y(i, j) - f.y(i, j - 1)) * inv_h;
    }
  }
  return out;
}

Field laplacian(const Field& phi) {
  // Same association as divergence(gradient(phi)) so the two agree bitwise.
  const GridGeometry& g = phi.geometry();
  Field out(g);
  const double inv_h = 1.0 / g.h();
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      const double c = phi(i, j);
      const double fx_plus = (phi(i + 1, j) - c) * inv_h;
      const double fx_minus = (c - phi(i - 1, j)) * inv_h;
      const double fy_plus = (phi(i, j + 1) - c) * inv_h;
      const double fy_minus = (c - phi(i, j - 1)) * inv_h;
      out(i, j) = (fx_plus - fx_minus) * inv_h + (fy_plus - fy_minus) * inv_h;
    }
  }
  return out;
}

Field spectral_laplacian(const Field& phi, const SpectralCache& cache) {
  return cache.apply_symbol(phi, cache.laplacian_symbol());
}

namespace {

void require_zero_mean(const Field& phi, const char* what) {
  const double m = mean(phi);
  const double rms = norm2(phi) / std::sqrt(phi.geometry().area());
  if (std::fabs(m) > kZeroMeanTolerance * rms) {
    std::ostringstream msg;
    msg << what << ": input must have zero mean (mean = " << m << ", rms = " << rms << ")";
    throw PreconditionError(msg.str());
  }
}

}  // namespace

Field inverse_laplacian_zero_mean(const Field& phi, const SpectralCache& cache) {
  require_same_geometry(phi.geometry(), cache.geometry(), "inverse_laplacian_zero_mean");
  require_zero_mean(phi, "inverse_laplacian_zero_mean");
  Spectrum modes = cache.forward(phi);
  auto m = modes.modes();
  const auto lam = cache.laplacian_eigenvalues();
  m[0] = 0.0;
  for (std::size_t k = 1; k < m.size(); ++k) m[k] /= lam[k];
  return cache.inverse(modes);
}

double norm_neg1(const Field& phi, const SpectralCache& cache) {
  require_same_geometry(phi.geometry(), cache.geometry(), "norm_neg1");
  require_zero_mean(phi, "norm_neg1");
  const Spectrum modes = cache.forward(phi);
  const auto m = modes.modes();
  const auto lam = cache.laplacian_eigenvalues();
  // Parseval: (psi||phi) = N^-2 sum conj(psi_hat) phi_hat.
  CompensatedSum acc;
  for (std::size_t k = 1; k < m.size(); ++k) acc.add(std::norm(m[k]) / lam[k]);
  const GridGeometry& g = phi.geometry();
  const double h = g.h();
  const double value = h * h * acc.value() / static_cast<double>(g.cells());
  return std::sqrt(std::max(value, 0.0));
}

double gradient_norm2(const Field& phi) {
  const EdgeField grad = gradient(phi);
  const double h = phi.geometry().h();
  return h * std::sqrt(std::max(edge_pairing(grad, grad), 0.0));
}

}  // namespace nch
