// Shared helpers for the test suites: analytic field construction, norms,
// and deterministic random fields.
#pragma once

#include <functional>
#include <random>

#include "ifdm/grid.hpp"

namespace ifdm::test {

using PointFn = std::function<Real(Real, Real, Real)>;

inline Field scalar_from(const PeriodicGrid& g, const PointFn& f) {
  Field out = make_scalar(g);
  for (int i3 = 0; i3 < g.n; ++i3)
    for (int i2 = 0; i2 < g.n; ++i2)
      for (int i1 = 0; i1 < g.n; ++i1)
        out.at(0, i1, i2, i3) = f(i1 * g.h(), i2 * g.h(), i3 * g.h());
  return out;
}

inline Field vector_from(const PeriodicGrid& g, const PointFn& f1,
                         const PointFn& f2, const PointFn& f3) {
  Field out = make_vector(g);
  const PointFn* fs[3] = {&f1, &f2, &f3};
  for (int c = 0; c < 3; ++c)
    for (int i3 = 0; i3 < g.n; ++i3)
      for (int i2 = 0; i2 < g.n; ++i2)
        for (int i1 = 0; i1 < g.n; ++i1)
          out.at(c, i1, i2, i3) = (*fs[c])(i1 * g.h(), i2 * g.h(), i3 * g.h());
  return out;
}

inline Real max_diff(const Field& a, const Field& b) {
  Real m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

inline Real max_abs_comp(const Field& f, int c) {
  const Real* p = f.comp(c);
  Real m = 0.0;
  for (std::size_t i = 0; i < f.points(); ++i) m = std::max(m, std::abs(p[i]));
  return m;
}

inline Field random_field(const PeriodicGrid& g, int comps, std::uint64_t seed,
                          Real amp = 1.0) {
  Field out(g, comps);
  std::mt19937_64 rng(seed);
  for (Real& v : out.data) v = amp * uniform_pm1(rng);
  return out;
}

}  // namespace ifdm::test
