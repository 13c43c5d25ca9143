#pragma once

// Periodic cell-centered and edge-centered grid functions on (0,L)^2.
//
// Indexing is 0-based internally: cell (i,j) has its center at
// ((i+1/2)h, (j+1/2)h). Storage is row-major in (i,j). Any integer index is
// accepted and wrapped modulo N.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nch {

class GridGeometry {
 public:
  GridGeometry(int n, double length);

  int n() const { return n_; }
  double length() const { return length_; }
  double h() const { return length_ / n_; }
  double area() const { return length_ * length_; }
  std::size_t cells() const { return static_cast<std::size_t>(n_) * n_; }

  int wrap(int i) const {
    const int r = i % n_;
    return r < 0 ? r + n_ : r;
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(wrap(i)) * n_ + wrap(j);
  }

  bool operator==(const GridGeometry& other) const = default;

 private:
  int n_;
  double length_;
};

/// Neumaier-compensated accumulation in extended precision.
class CompensatedSum {
 public:
  void add(long double x) {
    const long double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return static_cast<double>(sum_ + carry_); }

 private:
  long double sum_ = 0.0L;
  long double carry_ = 0.0L;
};

class Field {
 public:
  explicit Field(const GridGeometry& geometry, double value = 0.0);
  Field(const GridGeometry& geometry, std::vector<double> values);

  /// Samples f at every cell center.
  static Field from_function(const GridGeometry& geometry,
                             const std::function<double(double, double)>& f);

  const GridGeometry& geometry() const { return geometry_; }
  int n() const { return geometry_.n(); }

  double& operator()(int i, int j) { return values_[geometry_.index(i, j)]; }
  double operator()(int i, int j) const { return values_[geometry_.index(i, j)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  bool all_finite() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator*(double s, Field a) { return a *= s; }

  bool operator==(const Field& other) const = default;

 private:
  GridGeometry geometry_;
  std::vector<double> values_;
};

/// Edge-centered vector field: x(i,j) lives at (x_{i+1/2}, y_j) and y(i,j)
/// at (x_i, y_{j+1/2}), i.e. on the face between cell i (resp. j) and its
/// successor.
class EdgeField {
 public:
  explicit EdgeField(const GridGeometry& geometry);

  const GridGeometry& geometry() const { return geometry_; }

  double& x(int i, int j) { return x_[geometry_.index(i, j)]; }
  double x(int i, int j) const { return x_[geometry_.index(i, j)]; }
  double& y(int i, int j) { return y_[geometry_.index(i, j)]; }
  double y(int i, int j) const { return y_[geometry_.index(i, j)]; }

  std::span<double> x_values() { return x_; }
  std::span<double> y_values() { return y_; }
  std::span<const double> x_values() const { return x_; }
  std::span<const double> y_values() const { return y_; }

 private:
  GridGeometry geometry_;
  std::vector<double> x_;
  std::vector<double> y_;
};

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what);

/// Unweighted sum (phi||psi). Multiply by h^2 for the L2 pairing.
double inner_product(const Field& phi, const Field& psi);

double mean(const Field& phi);
Field project_zero_mean(const Field& phi);

/// h * sqrt((phi||phi))
double norm2(const Field& phi);
/// (h^2 sum phi^4)^(1/4)
double norm4(const Field& phi);

/// [f||g]_x, averaging the two face sums of every cell.
double edge_inner_product_x(const EdgeField& f, const EdgeField& g);
/// [f||g]_y
double edge_inner_product_y(const EdgeField& f, const EdgeField& g);
/// [f^x||g^x]_x + [f^y||g^y]_y, the pairing behind (grad phi||grad psi).
double edge_pairing(const EdgeField& f, const EdgeField& g);

}  // namespace nch
