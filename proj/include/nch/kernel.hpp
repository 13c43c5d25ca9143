#pragma once

// Interaction kernels restricted to the vertex-centered grid and the
// discrete periodic convolution
//
//   [J (*) phi]_{i,j} = h^2 sum_{k,l} J_{k+1/2,l+1/2} phi_{i-k,j-l}.
//
// The vertex x_{k+1/2} sits at displacement k*h, so the sampled kernel is
// stored as a stamp indexed by displacement (k mod N, l mod N).

#include <variant>
#include <vector>

#include "nch/field.hpp"
#include "nch/spectral.hpp"

namespace nch {

/// J(x) = amplitude * exp(-decay |x|^2)
struct GaussianKernel {
  double amplitude = 1.0;
  double decay = 10.0;
};

struct ConstantKernel {
  double value = 1.0;
};

/// Values at displacements (k h, l h), row-major, k,l in {0..N-1}.
struct TabulatedKernel {
  int n = 0;
  std::vector<double> values;
};

struct KernelParams {
  std::variant<GaussianKernel, ConstantKernel, TabulatedKernel> shape = GaussianKernel{};
  /// Number of periodic images folded in per direction (Gaussian only).
  int images = 3;

  void validate() const;
};

class SampledKernel {
 public:
  SampledKernel(const GridGeometry& geometry, std::vector<double> stamp, double conv_one,
                std::vector<double> symbol);

  const GridGeometry& geometry() const { return geometry_; }
  /// J at displacement (k h, l h).
  double value(int k, int l) const { return stamp_[geometry_.index(k, l)]; }
  std::span<const double> values() const { return stamp_; }
  /// [J (*) 1] = h^2 sum J.
  double conv_one() const { return conv_one_; }
  /// Real DFT symbol of the convolution: h^2 sum_k J_k e^{-2 pi i m.k/N}.
  std::span<const double> symbol() const { return symbol_; }
  double symbol(int k, int l) const { return symbol_[geometry_.index(k, l)]; }
  /// Largest |Im| / conv_one seen when the symbol was computed.
  double symbol_imaginary_residue() const { return imag_residue_; }

 private:
  friend SampledKernel sample_kernel(const KernelParams&, const SpectralCache&);

  GridGeometry geometry_;
  std::vector<double> stamp_;
  double conv_one_;
  std::vector<double> symbol_;
  double imag_residue_ = 0.0;
};

/// Samples the kernel at the vertices, folds periodic images, symmetrizes
/// under (k,l) -> (-k,-l) and computes conv_one and the symbol.
SampledKernel sample_kernel(const KernelParams& params, const SpectralCache& cache);

/// [J (*) phi] through the DFT symbol.
Field convolve(const SampledKernel& kernel, const Field& phi, const SpectralCache& cache);

/// eps^2 [J (*) 1] - 1; positive values are required by every scheme.
double gamma0(const SampledKernel& kernel, double epsilon);

/// eps^2([J (*) 1] phi - [J (*) phi]), computed mode-wise without
/// cancellation: eps^2 (conv_one - symbol_m) phi_hat_m.
Field nonlocal_operator(const SampledKernel& kernel, double epsilon, const Field& phi,
                        const SpectralCache& cache);

}  // namespace nch
