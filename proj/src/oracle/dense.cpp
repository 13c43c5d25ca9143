#include "nch/oracle/dense.hpp"

#include <cmath>
#include <numbers>

#include "nch/errors.hpp"

namespace nch::oracle {

namespace {

void guard(const GridGeometry& g) {
  if (g.n() > 16) throw PreconditionError("dense oracles are limited to N <= 16");
}

}  // namespace

Vector to_vector(const Field& phi) {
  const auto v = phi.values();
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[k];
  return out;
}

Field to_field(const GridGeometry& geometry, const Vector& v) {
  Field out(geometry);
  auto dst = out.values();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = v[static_cast<Eigen::Index>(k)];
  return out;
}

Matrix assemble_d1(int n, double h) {
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) += 2.0;
    d(i, (i + 1) % n) -= 1.0;
    d(i, (i + n - 1) % n) -= 1.0;
  }
  return d / (h * h);
}

Matrix assemble_ah(const GridGeometry& g) {
  guard(g);
  const int n = g.n();
  const Matrix d = assemble_d1(n, g.h());
  const Matrix eye = Matrix::Identity(n, n);
  // Kronecker products with index i*N + j: D (x) I acts on i, I (x) D on j.
  Matrix a = Matrix::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      a.block(i * n, k * n, n, n) += d(i, k) * eye + eye(i, k) * d;
    }
  }
  return a;
}

Matrix assemble_convolution(const SampledKernel& kernel) {
  const GridGeometry& g = kernel.geometry();
  guard(g);
  const int n = g.n();
  const double h2 = g.h() * g.h();
  Matrix c = Matrix::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          const int src = ((i - k + n) % n) * n + (j - l + n) % n;
          c(i * n + j, src) += h2 * kernel.value(k, l);
        }
      }
    }
  }
  return c;
}

Matrix assemble_aj(const SampledKernel& kernel) {
  const Matrix c = assemble_convolution(kernel);
  double conv_one = 0.0;
  for (double v : kernel.values()) conv_one += v;
  conv_one *= kernel.geometry().h() * kernel.geometry().h();
  return conv_one * Matrix::Identity(c.rows(), c.cols()) - c;
}

double naive_inner_product(const Field& phi, const Field& psi) {
  require_same_geometry(phi.geometry(), psi.geometry(), "naive_inner_product");
  double s = 0.0;
  for (int i = 0; i < phi.n(); ++i) {
    for (int j = 0; j < phi.n(); ++j) s += phi(i, j) * psi(i, j);
  }
  return s;
}

Spectrum direct_dft(const Field& phi) {
  const GridGeometry& g = phi.geometry();
  guard(g);
  const int n = g.n();
  Spectrum out(g);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      std::complex<double> s = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double arg = -2.0 * std::numbers::pi * ((i * k) % n + (j * l) % n) / n;
          s += phi(i, j) * std::complex<double>(std::cos(arg), std::sin(arg));
        }
      }
      out(k, l) = s;
    }
  }
  return out;
}

Field direct_inverse_dft(const Spectrum& modes) {
  const GridGeometry& g = modes.geometry();
  guard(g);
  const int n = g.n();
  Field out(g);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::complex<double> s = 0.0;
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          const double arg = 2.0 * std::numbers::pi * ((i * k) % n + (j * l) % n) / n;
          s += modes(k, l) * std::complex<double>(std::cos(arg), std::sin(arg));
        }
      }
      out(i, j) = s.real() / (n * n);
    }
  }
  return out;
}

Field direct_convolution(const SampledKernel& kernel, const Field& phi) {
  const GridGeometry& g = phi.geometry();
  require_same_geometry(g, kernel.geometry(), "direct_convolution");
  const int n = g.n();
  const double h2 = g.h() * g.h();
  Field out(g);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) s += kernel.value(k, l) * phi(i - k, j - l);
      }
      out(i, j) = h2 * s;
    }
  }
  return out;
}

double naive_energy(const Field& u, const SampledKernel& kernel, double epsilon,
                    const PotentialParams& potential) {
  const GridGeometry& g = u.geometry();
  const double h2 = g.h() * g.h();
  double conv_one = 0.0;
  for (double v : kernel.values()) conv_one += v;
  conv_one *= h2;
  const Field ju = direct_convolution(kernel, u);
  double bulk = 0.0;
  double uu = 0.0;
  double uju = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      bulk += potential_value(potential, u(i, j));
      uu += u(i, j) * u(i, j);
      uju += u(i, j) * ju(i, j);
    }
  }
  const double e2 = epsilon * epsilon;
  return h2 * bulk + 0.5 * e2 * conv_one * h2 * uu - 0.5 * e2 * h2 * uju;
}

DenseStep dense_step(const SchemeState& state, const SchemeConfig& cfg,
                     const SampledKernel& kernel) {
  const GridGeometry& g = state.u_curr.geometry();
  guard(g);
  const Eigen::Index m = static_cast<Eigen::Index>(g.cells());
  const Matrix ah = assemble_ah(g);
  const Matrix conv = assemble_convolution(kernel);
  const Matrix aj = assemble_aj(kernel);
  const double e2 = cfg.epsilon * cfg.epsilon;
  double conv_one = 0.0;
  for (double v : kernel.values()) conv_one += v;
  conv_one *= g.h() * g.h();
  const Vector u = to_vector(state.u_curr);
  const double tau = cfg.tau;
  const PotentialParams& pot = cfg.potential;
  const auto fprime = [&](const Vector& v) {
    Vector out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) out[k] = potential_d1(pot, v[k]);
    return out;
  };

  if (is_two_step(cfg.scheme) && !state.u_prev) throw StateError("dense_step needs u_prev");
  const Vector up = state.u_prev ? to_vector(*state.u_prev) : u;

  Matrix big = Matrix::Zero(2 * m, 2 * m);
  Vector rhs(2 * m);

  if (cfg.scheme == Scheme::ssi1 || cfg.scheme == Scheme::two_li) {
    const double a = cfg.scheme == Scheme::ssi1 ? 1.0 / tau : 3.0 / (2.0 * tau);
    const double s = cfg.scheme == Scheme::ssi1 ? cfg.stabilization : 0.0;
    // a u' + A_h w' = b ;  w' - (S + eps^2 A_J) u' = explicit part
    big.topLeftCorner(m, m) = a * Matrix::Identity(m, m);
    big.topRightCorner(m, m) = ah;
    big.bottomLeftCorner(m, m) = -(s * Matrix::Identity(m, m) + e2 * aj);
    big.bottomRightCorner(m, m) = Matrix::Identity(m, m);
    if (cfg.scheme == Scheme::ssi1) {
      rhs.head(m) = u / tau;
      rhs.tail(m) = fprime(u) - s * u;
    } else {
      rhs.head(m) = (4.0 * u - up) / (2.0 * tau);
      rhs.tail(m) = 2.0 * fprime(u) - fprime(up);
    }
    const Vector x = big.fullPivLu().solve(rhs);
    return DenseStep{to_field(g, x.head(m)), to_field(g, x.tail(m))};
  }

  // Nonlinear: R(u', w') = [a u' + A_h w' - b ; w' - N(u') - Lin u' - e].
  double a = 1.0 / tau;
  Vector b = u / tau;
  Vector e = Vector::Zero(m);
  Matrix lin = e2 * aj;
  bool cubic = false;
  if (cfg.scheme == Scheme::bdf2) {
    a = 3.0 / (2.0 * tau);
    b = (4.0 * u - up) / (2.0 * tau);
  } else if (cfg.scheme == Scheme::convex_splitting) {
    cubic = true;
    lin = 2.0 * e2 * conv_one * Matrix::Identity(m, m);
    e = -(1.0 + e2 * conv_one) * u - e2 * (conv * u);
  }
  const auto nonlin = [&](const Vector& v) {
    if (!cubic) return fprime(v);
    return Vector(v.array().cube().matrix());
  };
  const auto slope = [&](const Vector& v) {
    Vector out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      out[k] = cubic ? 3.0 * v[k] * v[k] : potential_d2(pot, v[k]);
    }
    return out;
  };
  const auto residual = [&](const Vector& x) {
    Vector r(2 * m);
    r.head(m) = a * x.head(m) + ah * x.tail(m) - b;
    r.tail(m) = x.tail(m) - nonlin(x.head(m)) - lin * x.head(m) - e;
    return r;
  };

  Vector x(2 * m);
  x.head(m) = u;
  x.tail(m) = nonlin(u) + lin * u + e;
  Vector r = residual(x);
  for (int it = 0; it < 100 && r.norm() > 1e-14 * (1.0 + b.norm()); ++it) {
    big.setZero();
    big.topLeftCorner(m, m) = a * Matrix::Identity(m, m);
    big.topRightCorner(m, m) = ah;
    big.bottomLeftCorner(m, m) = -lin;
    big.bottomLeftCorner(m, m).diagonal() -= slope(x.head(m));
    big.bottomRightCorner(m, m) = Matrix::Identity(m, m);
    const Vector dx = big.fullPivLu().solve(-r);
    double step = 1.0;
    Vector trial = x + dx;
    Vector rt = residual(trial);
    while (rt.norm() >= r.norm() && step > 1e-4) {
      step *= 0.5;
      trial = x + step * dx;
      rt = residual(trial);
    }
    if (rt.norm() >= r.norm()) break;
    x = trial;
    r = rt;
  }
  return DenseStep{to_field(g, x.head(m)), to_field(g, x.tail(m))};
}

}  // namespace nch::oracle
