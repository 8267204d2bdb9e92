// Periodic grid on the unit cube and flat field storage.
//
// Values are collocated at x = i*h, i = 0..n-1, h = 1/n, on every axis.
// Storage order is fixed by the persistence format: component index slowest,
// then x3, x2, x1 with x1 fastest.
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "ifdm/core.hpp"

namespace ifdm {

struct PeriodicGrid {
  int n = 0;  // points per axis, all axes equal

  PeriodicGrid() = default;
  explicit PeriodicGrid(int n_per_axis) : n(n_per_axis) {
    if (n < 4) throw ArgumentError("PeriodicGrid: n_per_axis must be >= 4");
  }

  Real h() const { return 1.0 / static_cast<Real>(n); }
  std::size_t points() const {
    return static_cast<std::size_t>(n) * n * n;
  }
  Real cell_volume() const { return h() * h() * h(); }

  // Periodic wrap of a single axis index.
  int wrap(int i) const {
    i %= n;
    return i < 0 ? i + n : i;
  }

  // Spatial linear index, x1 fastest.
  std::size_t idx(int i1, int i2, int i3) const {
    return (static_cast<std::size_t>(i3) * n + i2) * n + i1;
  }

  std::array<Real, 3> point(int i1, int i2, int i3) const {
    return {i1 * h(), i2 * h(), i3 * h()};
  }

  bool operator==(const PeriodicGrid&) const = default;
};

// Flat multi-component field over a PeriodicGrid. comps = 1 scalar,
// 3 vector, 9 tensor (row-major).
struct Field {
  PeriodicGrid grid;
  int comps = 0;
  std::vector<Real> data;  // comps * n^3, component slowest

  Field() = default;
  Field(const PeriodicGrid& g, int components)
      : grid(g), comps(components),
        data(static_cast<std::size_t>(components) * g.points(), 0.0) {}

  std::size_t points() const { return grid.points(); }

  Real* comp(int c) { return data.data() + static_cast<std::size_t>(c) * points(); }
  const Real* comp(int c) const {
    return data.data() + static_cast<std::size_t>(c) * points();
  }

  Real& at(int c, int i1, int i2, int i3) {
    return comp(c)[grid.idx(i1, i2, i3)];
  }
  Real at(int c, int i1, int i2, int i3) const {
    return comp(c)[grid.idx(i1, i2, i3)];
  }

  void fill(Real v) { data.assign(data.size(), v); }

  bool operator==(const Field&) const = default;
};

inline Field make_scalar(const PeriodicGrid& g) { return Field(g, 1); }
inline Field make_vector(const PeriodicGrid& g) { return Field(g, 3); }
inline Field make_tensor(const PeriodicGrid& g) { return Field(g, 9); }

// Row-major tensor component index.
constexpr int tensor_comp(int i, int j) { return 3 * i + j; }

inline bool is_finite(const Field& f) {
  for (Real v : f.data)
    if (!std::isfinite(v)) return false;
  return true;
}

inline void require_finite(const Field& f, const char* op) {
  if (!is_finite(f))
    throw InvalidFieldError(std::string(op) + ": non-finite field values");
}

inline Real max_abs(const Field& f) {
  Real m = 0.0;
  for (Real v : f.data) m = std::max(m, std::abs(v));
  return m;
}

// Mean of one component under the uniform quadrature.
inline Real mean(const Field& f, int c = 0) {
  const Real* p = f.comp(c);
  Real s = 0.0;
  for (std::size_t i = 0; i < f.points(); ++i) s += p[i];
  return s / static_cast<Real>(f.points());
}

// Elementwise linear combination a*x + b*y.
inline Field lincomb(Real a, const Field& x, Real b, const Field& y) {
  if (x.comps != y.comps || x.grid.n != y.grid.n)
    throw ArgumentError("lincomb: mismatched fields");
  Field out(x.grid, x.comps);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    out.data[i] = a * x.data[i] + b * y.data[i];
  return out;
}

inline void axpy(Real a, const Field& x, Field& y) {
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
}

inline void scale(Field& x, Real a) {
  for (Real& v : x.data) v *= a;
}

}  // namespace ifdm
