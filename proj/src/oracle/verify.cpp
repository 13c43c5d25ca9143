#include "nch/oracle/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>

#include "nch/oracle/dense.hpp"

namespace nch::oracle {

namespace {

Field random_field(const GridGeometry& g, std::mt19937_64& gen, double amplitude = 1.0) {
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  Field f(g);
  for (double& v : f.values()) v = dist(gen);
  return f;
}

EdgeField random_edge_field(const GridGeometry& g, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  EdgeField f(g);
  for (double& v : f.x_values()) v = dist(gen);
  for (double& v : f.y_values()) v = dist(gen);
  return f;
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) m = std::max(m, std::fabs(av[k] - bv[k]));
  return m;
}

double max_abs(const Field& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::fabs(v));
  return m;
}

double edge_norm(const EdgeField& f) { return std::sqrt(edge_pairing(f, f)); }
double plain_norm(const Field& f) { return std::sqrt(naive_inner_product(f, f)); }

class Suite {
 public:
  explicit Suite(const VerifyHooks& hooks) : hooks_(hooks) {}

  Field lap(const Field& phi) const { return hooks_.laplacian ? hooks_.laplacian(phi) : laplacian(phi); }
  double ip(const Field& a, const Field& b) const {
    return hooks_.inner_product ? hooks_.inner_product(a, b) : inner_product(a, b);
  }

  void record(const std::string& name, int n, double error, double tol) {
    results_.push_back(CheckResult{name, n, error, tol, std::isfinite(error) && error <= tol});
  }

  void summation_by_parts(int n) {
    const GridGeometry g(n, 1.0);
    std::mt19937_64 gen(1000 + n);
    double grad_err = 0.0, div_err = 0.0, sym_err = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Field phi = random_field(g, gen);
      const Field psi = random_field(g, gen);
      const EdgeField f = random_edge_field(g, gen);
      // [grad phi, grad psi] = -(phi || Delta psi)
      const EdgeField gphi = gradient(phi);
      const EdgeField gpsi = gradient(psi);
      const double lhs = edge_pairing(gphi, gpsi);
      const double rhs = -ip(phi, lap(psi));
      grad_err = std::max(grad_err, std::fabs(lhs - rhs) / (edge_norm(gphi) * edge_norm(gpsi)));
      // [grad phi, f] = -(phi || div f)
      const double l2 = edge_pairing(gphi, f);
      const double r2 = -ip(phi, divergence(f));
      div_err = std::max(div_err, std::fabs(l2 - r2) / (edge_norm(gphi) * edge_norm(f)));
      // (phi || Delta psi) = (psi || Delta phi)
      const Field lpsi = lap(psi);
      const Field lphi = lap(phi);
      const double s1 = ip(phi, lpsi);
      const double s2 = ip(psi, lphi);
      sym_err = std::max(sym_err, std::fabs(s1 - s2) / (plain_norm(phi) * plain_norm(lpsi)));
    }
    record("sbp_gradient", n, grad_err, 1e-12);
    record("sbp_divergence", n, div_err, 1e-12);
    record("sbp_symmetry", n, sym_err, 1e-12);
  }

  void laplacian_spectrum(int n) {
    const GridGeometry g(n, 1.0);
    const SpectralCache cache(g);
    const Matrix ah = assemble_ah(g);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(ah);
    std::vector<double> formula;
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) formula.push_back(laplacian_eigenvalue(g, k, l));
    }
    std::sort(formula.begin(), formula.end());
    double err = 0.0;
    for (int k = 0; k < n * n; ++k) err = std::max(err, std::fabs(eig.eigenvalues()[k] - formula[k]));
    // Simple zero eigenvalue with a constant eigenvector.
    const double gap = eig.eigenvalues()[1];
    Vector e0 = eig.eigenvectors().col(0);
    e0 /= e0[0];
    const double const_err = (e0 - Vector::Ones(e0.size())).cwiseAbs().maxCoeff();
    record("ah_eigenvalues", n, std::max(err, gap > 1e-6 ? const_err : 1.0), 1e-10);

    // The operator itself applied to Fourier modes and to random fields.
    double mode_err = 0.0;
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        for (int phase = 0; phase < 2; ++phase) {
          const Field mode = Field::from_function(g, [&](double x, double y) {
            const double arg = 2.0 * std::numbers::pi * (k * x + l * y);
            return phase == 0 ? std::cos(arg) : std::sin(arg);
          });
          Field res = lap(mode);
          res += mode * laplacian_eigenvalue(g, k, l);
          mode_err = std::max(mode_err, max_abs(res) / cache.largest_eigenvalue());
        }
      }
    }
    record("laplacian_symbol", n, mode_err, 1e-12);
    std::mt19937_64 gen(2000 + n);
    double dense_err = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Field phi = random_field(g, gen);
      const Field dense = to_field(g, -(ah * to_vector(phi)));
      dense_err = std::max(dense_err, max_abs_diff(lap(phi), dense) / max_abs(dense));
    }
    record("laplacian_dense", n, dense_err, 1e-12);
  }

  void kernel_spectrum(int n) {
    const GridGeometry g(n, 1.0);
    const SpectralCache cache(g);
    const SampledKernel kernel = sample_kernel(KernelParams{GaussianKernel{1.0, 10.0}, 3}, cache);
    const Matrix aj = assemble_aj(kernel);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(aj);
    std::vector<double> formula;
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) formula.push_back(kernel.conv_one() - kernel.symbol(k, l));
    }
    std::sort(formula.begin(), formula.end());
    double err = 0.0;
    for (int k = 0; k < n * n; ++k) err = std::max(err, std::fabs(eig.eigenvalues()[k] - formula[k]));
    record("aj_eigenvalues", n, err, 1e-10);
    record("aj_row_sums", n, aj.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    record("aj_symmetry", n, (aj - aj.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    record("aj_semidefinite", n, std::max(0.0, -eig.eigenvalues()[0]), 1e-10);
  }

  void transforms(int n) {
    const GridGeometry g(n, 1.0);
    const SpectralCache cache(g);
    const SampledKernel kernel = sample_kernel(KernelParams{GaussianKernel{1.0, 10.0}, 3}, cache);
    std::mt19937_64 gen(3000 + n);
    double conv_err = 0.0, dft_err = 0.0, round_err = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Field phi = random_field(g, gen);
      const Field direct = direct_convolution(kernel, phi);
      conv_err = std::max(conv_err,
                          max_abs_diff(convolve(kernel, phi, cache), direct) / max_abs(direct));
      const Spectrum fast = cache.forward(phi);
      const Spectrum slow = direct_dft(phi);
      double scale = 0.0, diff = 0.0;
      for (std::size_t m = 0; m < fast.modes().size(); ++m) {
        scale = std::max(scale, std::abs(slow.modes()[m]));
        diff = std::max(diff, std::abs(fast.modes()[m] - slow.modes()[m]));
      }
      dft_err = std::max(dft_err, diff / scale);
      round_err = std::max(round_err, max_abs_diff(cache.inverse(fast), phi) / max_abs(phi));
      round_err = std::max(round_err, max_abs_diff(direct_inverse_dft(slow), phi) / max_abs(phi));
    }
    record("convolution_direct", n, conv_err, 1e-12);
    record("dft_direct", n, dft_err, 1e-12);
    record("dft_round_trip", n, round_err, 1e-13);
  }

  void inverse_laplacian(int n) {
    const GridGeometry g(n, 1.0);
    const SpectralCache cache(g);
    const Matrix pinv = assemble_ah(g).completeOrthogonalDecomposition().pseudoInverse();
    std::mt19937_64 gen(4000 + n);
    double inv_err = 0.0, neg1_err = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Field phi = project_zero_mean(random_field(g, gen));
      const Vector dense = pinv * to_vector(phi);
      const Field psi = inverse_laplacian_zero_mean(phi, cache);
      inv_err = std::max(inv_err, max_abs_diff(psi, to_field(g, dense)) / dense.cwiseAbs().maxCoeff());
      const double h = g.h();
      const double want = std::sqrt(h * h * dense.dot(to_vector(phi)));
      neg1_err = std::max(neg1_err, std::fabs(norm_neg1(phi, cache) - want) / want);
    }
    record("inverse_laplacian_dense", n, inv_err, 1e-10);
    record("norm_neg1_dense", n, neg1_err, 1e-10);
  }

  void energy_naive(int n) {
    const GridGeometry g(n, 1.0);
    const SpectralCache cache(g);
    const SampledKernel kernel = sample_kernel(KernelParams{GaussianKernel{1.0, 10.0}, 3}, cache);
    std::mt19937_64 gen(5000 + n);
    double err = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Field u = random_field(g, gen);
      for (const PotentialParams& p : {PotentialParams::double_well(), PotentialParams::truncated(1.1)}) {
        const double want = naive_energy(u, kernel, 2.0, p);
        err = std::max(err, std::fabs(energy(u, kernel, 2.0, p, cache) - want) / std::fabs(want));
      }
    }
    record("energy_naive", n, err, 1e-12);
  }

  void dense_schemes() {
    const int n = 4;
    const GridGeometry g(n, 1.0);
    const SpectralCache cache(g);
    const SampledKernel kernel = sample_kernel(KernelParams{GaussianKernel{1.0, 10.0}, 3}, cache);
    std::mt19937_64 gen(6000);
    for (Scheme s : {Scheme::backward_euler, Scheme::convex_splitting, Scheme::ssi1, Scheme::bdf2,
                     Scheme::two_li}) {
      SchemeConfig cfg;
      cfg.scheme = s;
      cfg.tau = 0.01;
      cfg.epsilon = 2.0;
      cfg.stability_policy = StabilityPolicy::ignore;
      if (is_linear(s)) {
        cfg.potential = PotentialParams::truncated(1.1);
        cfg.stabilization = cfg.potential.beta() / 2.0;
      }
      const double amplitude = is_linear(s) ? 1.5 : 0.6;
      double err = 0.0;
      for (int trial = 0; trial < 3; ++trial) {
        const Field u = random_field(g, gen, amplitude);
        Field up = random_field(g, gen, amplitude);
        up += Field(g, mean(u) - mean(up));
        SchemeState state{u, std::nullopt, std::nullopt, 1, 0.0};
        if (is_two_step(s)) state.u_prev = up;
        StepResult fast = [&] {
          switch (s) {
            case Scheme::backward_euler: return step_backward_euler(state, cfg, kernel, cache);
            case Scheme::convex_splitting: return step_convex_splitting(state, cfg, kernel, cache);
            case Scheme::ssi1: return step_ssi1(state, cfg, kernel, cache);
            case Scheme::bdf2: return step_bdf2(state, cfg, kernel, cache);
            case Scheme::two_li: break;
          }
          return step_2li(state, cfg, kernel, cache);
        }();
        const DenseStep slow = dense_step(state, cfg, kernel);
        err = std::max(err, max_abs_diff(fast.u_next, slow.u));
        err = std::max(err, max_abs_diff(fast.omega_next, slow.omega) /
                                std::max(1.0, max_abs(slow.omega)));
      }
      record(std::string("dense_step_") + std::string(to_string(s)), n, err,
             is_linear(s) ? 1e-11 : 1e-9);
    }
  }

  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  const VerifyHooks& hooks_;
  std::vector<CheckResult> results_;
};

}  // namespace

std::vector<CheckResult> run_verify(const VerifyHooks& hooks) {
  Suite suite(hooks);
  for (int n : {4, 8}) {
    suite.summation_by_parts(n);
    suite.laplacian_spectrum(n);
    suite.kernel_spectrum(n);
    suite.transforms(n);
    suite.inverse_laplacian(n);
    suite.energy_naive(n);
  }
  suite.dense_schemes();
  return suite.take();
}

void print_verify_table(std::ostream& out, const std::vector<CheckResult>& results) {
  out << std::left << std::setw(28) << "check" << std::setw(4) << "N" << std::setw(14) << "error"
      << std::setw(12) << "tolerance" << "result\n";
  for (const CheckResult& r : results) {
    out << std::left << std::setw(28) << r.name << std::setw(4) << r.n << std::setw(14)
        << std::setprecision(3) << std::scientific << r.error << std::setw(12) << r.tolerance
        << (r.passed ? "PASS" : "FAIL") << '\n';
  }
  out << std::defaultfloat;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace nch::oracle
