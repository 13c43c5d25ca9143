#pragma once

// Staggered-grid difference operators and their DFT diagonalization.
//
// Mode (k,l), k,l in {0..N-1}, is the DFT frequency pair; k = 0 corresponds
// to the paper-style index k = N. The forward transform is unnormalized and
// the inverse divides by N^2.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "nch/field.hpp"

namespace nch {

/// Complex DFT coefficients of a grid function, row-major in (k,l).
class Spectrum {
 public:
  explicit Spectrum(const GridGeometry& geometry);

  const GridGeometry& geometry() const { return geometry_; }
  std::complex<double>& operator()(int k, int l) { return modes_[geometry_.index(k, l)]; }
  std::complex<double> operator()(int k, int l) const { return modes_[geometry_.index(k, l)]; }
  std::span<std::complex<double>> modes() { return modes_; }
  std::span<const std::complex<double>> modes() const { return modes_; }

 private:
  GridGeometry geometry_;
  std::vector<std::complex<double>> modes_;
};

/// Eigenvalue of -Delta_h for mode (k,l): (2/h^2)(2 - cos(2 pi k/N) - cos(2 pi l/N)).
double laplacian_eigenvalue(const GridGeometry& geometry, int k, int l);

/// Immutable per-grid data shared by every solver on that grid: the
/// Laplacian eigenvalues and the FFT plans. Safe to share across threads.
class SpectralCache {
 public:
  explicit SpectralCache(const GridGeometry& geometry);

  const GridGeometry& geometry() const { return geometry_; }

  /// lambda_{k,l} >= 0, the eigenvalues of -Delta_h (row-major by mode).
  std::span<const double> laplacian_eigenvalues() const { return eigenvalues_; }
  /// Symbol of Delta_h itself, i.e. -lambda_{k,l}.
  std::vector<double> laplacian_symbol() const;
  /// Smallest positive eigenvalue of -Delta_h.
  double smallest_positive_eigenvalue() const { return lambda_min_positive_; }
  double largest_eigenvalue() const { return lambda_max_; }

  Spectrum forward(const Field& phi) const;
  Field inverse(const Spectrum& modes) const;

  /// Applies a real diagonal multiplier in mode space: F^{-1}(m .* F(phi)).
  Field apply_symbol(const Field& phi, std::span<const double> multiplier) const;

 private:
  struct Plans;

  GridGeometry geometry_;
  std::vector<double> eigenvalues_;
  double lambda_min_positive_ = 0.0;
  double lambda_max_ = 0.0;
  std::shared_ptr<const Plans> plans_;
};

Spectrum dft_forward(const Field& phi, const SpectralCache& cache);
Field dft_inverse(const Spectrum& modes, const SpectralCache& cache);

/// (D_x phi, D_y phi) with forward differences onto the faces.
EdgeField gradient(const Field& phi);
/// d_x f^x + d_y f^y with backward differences back to the cells.
Field divergence(const EdgeField& f);
/// Five-point periodic stencil, equal to divergence(gradient(phi)).
Field laplacian(const Field& phi);
/// Delta_h evaluated through the DFT symbol.
Field spectral_laplacian(const Field& phi, const SpectralCache& cache);

/// Relative tolerance on the mean under which a field counts as zero-mean.
inline constexpr double kZeroMeanTolerance = 1e-12;

/// Returns psi with -Delta_h psi = phi and mean(psi) = 0. Throws
/// PreconditionError when phi is not zero-mean within kZeroMeanTolerance.
Field inverse_laplacian_zero_mean(const Field& phi, const SpectralCache& cache);

/// sqrt(h^2 ((-Delta_h)^{-1} phi || phi)) on zero-mean fields.
double norm_neg1(const Field& phi, const SpectralCache& cache);

/// ||grad_h phi||_2
double gradient_norm2(const Field& phi);

}  // namespace nch
