#pragma once

// Test oracles: dense assembled operators, direct (non-FFT) transforms and
// convolutions, and dense solves of the five schemes. Cost grows like N^4
// to N^6; meant for N <= 16.

#include <Eigen/Dense>

#include "nch/energy.hpp"
#include "nch/field.hpp"
#include "nch/kernel.hpp"
#include "nch/spectral.hpp"
#include "nch/steppers.hpp"

namespace nch::oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Stacks values with index i*N + j.
Vector to_vector(const Field& phi);
Field to_field(const GridGeometry& geometry, const Vector& v);

/// Periodic 1D second-difference matrix D_h = tridiag(-1, 2, -1) / h^2.
Matrix assemble_d1(int n, double h);
/// A_h = I (x) D_h + D_h (x) I, the matrix of -Delta_h.
Matrix assemble_ah(const GridGeometry& geometry);
/// Matrix of phi -> [J (*) phi] built entry by entry from the definition.
Matrix assemble_convolution(const SampledKernel& kernel);
/// A_J = [J*1] I - (convolution matrix).
Matrix assemble_aj(const SampledKernel& kernel);

/// Sums in plain double loops, independent of the production reductions.
double naive_inner_product(const Field& phi, const Field& psi);

/// O(N^4) DFT from the definition, unnormalized forward.
Spectrum direct_dft(const Field& phi);
/// O(N^4) inverse DFT (divides by N^2), real part.
Field direct_inverse_dft(const Spectrum& modes);
/// Quadruple loop h^2 sum_{k,l} J_{k,l} phi_{i-k,j-l}.
Field direct_convolution(const SampledKernel& kernel, const Field& phi);

/// E_h from loops and the direct convolution.
double naive_energy(const Field& u, const SampledKernel& kernel, double epsilon,
                    const PotentialParams& potential);

struct DenseStep {
  Field u;
  Field omega;
};

/// Solves one step of `cfg.scheme` on the assembled 2N^2-unknown (u, omega)
/// system: damped Newton with dense LU for the nonlinear schemes, one dense
/// LU solve for SSI1 and 2LI. `state.u_prev` is required for BDF2 and 2LI.
DenseStep dense_step(const SchemeState& state, const SchemeConfig& cfg,
                     const SampledKernel& kernel);

}  // namespace nch::oracle
