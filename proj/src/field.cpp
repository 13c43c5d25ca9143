#include "nch/field.hpp"

#include <string>

#include "nch/errors.hpp"

namespace nch {

GridGeometry::GridGeometry(int n, double length) : n_(n), length_(length) {
  if (n < 2) throw ConfigError("grid.N", "must be at least 2, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw ConfigError("grid.L", "must be a positive finite number");
  }
}

Field::Field(const GridGeometry& geometry, double value)
    : geometry_(geometry), values_(geometry.cells(), value) {}

Field::Field(const GridGeometry& geometry, std::vector<double> values)
    : geometry_(geometry), values_(std::move(values)) {
  if (values_.size() != geometry_.cells()) {
    throw DimensionError("field has " + std::to_string(values_.size()) + " values, grid needs " +
                         std::to_string(geometry_.cells()));
  }
}

Field Field::from_function(const GridGeometry& geometry,
                           const std::function<double(double, double)>& f) {
  Field out(geometry);
  const double h = geometry.h();
  for (int i = 0; i < geometry.n(); ++i) {
    for (int j = 0; j < geometry.n(); ++j) {
      out(i, j) = f((i + 0.5) * h, (j + 0.5) * h);
    }
  }
  return out;
}

bool Field::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Field& Field::operator+=(const Field& other) {
  require_same_geometry(geometry_, other.geometry_, "field addition");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_geometry(geometry_, other.geometry_, "field subtraction");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

EdgeField::EdgeField(const GridGeometry& geometry)
    : geometry_(geometry), x_(geometry.cells(), 0.0), y_(geometry.cells(), 0.0) {}

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what) {
  if (!(a == b)) {
    throw DimensionError(std::string(what) + ": grid mismatch (N=" + std::to_string(a.n()) +
                         ", L=" + std::to_string(a.length()) + " vs N=" + std::to_string(b.n()) +
                         ", L=" + std::to_string(b.length()) + ")");
  }
}

double inner_product(const Field& phi, const Field& psi) {
  require_same_geometry(phi.geometry(), psi.geometry(), "inner_product");
  CompensatedSum acc;
  const auto a = phi.values();
  const auto b = psi.values();
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc.add(static_cast<long double>(a[k]) * b[k]);
  }
  return acc.value();
}

double mean(const Field& phi) {
  CompensatedSum acc;
  for (double v : phi.values()) acc.add(v);
  return acc.value() / static_cast<double>(phi.size());
}

Field project_zero_mean(const Field& phi) {
  Field out = phi;
  const double m = mean(phi);
  for (double& v : out.values()) v -= m;
  return out;
}

double norm2(const Field& phi) {
  return phi.geometry().h() * std::sqrt(inner_product(phi, phi));
}

double norm4(const Field& phi) {
  CompensatedSum acc;
  for (double v : phi.values()) {
    const long double sq = static_cast<long double>(v) * v;
    acc.add(sq * sq);
  }
  const double h = phi.geometry().h();
  return std::sqrt(std::sqrt(h * h * acc.value()));
}

namespace {

double face_average_sum(std::span<const double> f, std::span<const double> g,
                        const GridGeometry& geom, bool along_x) {
  CompensatedSum acc;
  const int n = geom.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // Faces i+1/2 and i-1/2 of cell (i,j); face i-1/2 is stored at i-1.
      const std::size_t plus = geom.index(i, j);
      const std::size_t minus = along_x ? geom.index(i - 1, j) : geom.index(i, j - 1);
      acc.add(0.5L * (static_cast<long double>(f[plus]) * g[plus] +
                      static_cast<long double>(f[minus]) * g[minus]));
    }
  }
  return acc.value();
}

}  // namespace

double edge_inner_product_x(const EdgeField& f, const EdgeField& g) {
  require_same_geometry(f.geometry(), g.geometry(), "edge_inner_product_x");
  return face_average_sum(f.x_values(), g.x_values(), f.geometry(), true);
}

double edge_inner_product_y(const EdgeField& f, const EdgeField& g) {
  require_same_geometry(f.geometry(), g.geometry(), "edge_inner_product_y");
  return face_average_sum(f.y_values(), g.y_values(), f.geometry(), false);
}

double edge_pairing(const EdgeField& f, const EdgeField& g) {
  return edge_inner_product_x(f, g) + edge_inner_product_y(f, g);
}

}  // namespace nch
