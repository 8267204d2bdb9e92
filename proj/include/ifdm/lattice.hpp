// Space-time lattice and dual fields D = (lambda, A, mu).
//
// Dual fields live at nt+1 nodal time levels. The packed dual gradient is
// collocated at interval centers: time derivatives by forward difference
// per interval, spatial derivatives on the time-averaged fields. This makes
// discrete summation-by-parts in time exact, so the initial-condition terms
// of the dual functional cancel the telescoping boundary terms to machine
// precision.
//
// Final-time values lambda(.,T) = A(.,T) = 0 are part of the discretization
// and are re-imposed after every update; mu carries no boundary data on the
// torus.
#pragma once

#include <vector>

#include "ifdm/grid.hpp"
#include "ifdm/operators.hpp"
#include "ifdm/packed.hpp"
#include "ifdm/primal.hpp"

namespace ifdm {

struct SpaceTimeLattice {
  PeriodicGrid grid;
  int nt = 0;    // time intervals
  Real T = 0.0;  // final time

  SpaceTimeLattice() = default;
  SpaceTimeLattice(const PeriodicGrid& g, int n_intervals, Real final_time)
      : grid(g), nt(n_intervals), T(final_time) {
    if (nt < 2) throw ArgumentError("SpaceTimeLattice: nt must be >= 2");
    if (!(T > 0.0)) throw ArgumentError("SpaceTimeLattice: T must be positive");
  }

  Real dt() const { return T / static_cast<Real>(nt); }
  // Quadrature weight per collocation point.
  Real weight() const { return dt() * grid.cell_volume(); }

  bool operator==(const SpaceTimeLattice&) const = default;
};

struct DualState {
  SpaceTimeLattice lattice;
  std::vector<Field> lambda;  // nt+1 vector fields
  std::vector<Field> A;       // nt+1 tensor fields
  std::vector<Field> mu;      // nt+1 scalar fields

  DualState() = default;
  explicit DualState(const SpaceTimeLattice& lat) : lattice(lat) {
    lambda.assign(lat.nt + 1, make_vector(lat.grid));
    A.assign(lat.nt + 1, make_tensor(lat.grid));
    mu.assign(lat.nt + 1, make_scalar(lat.grid));
  }

  void enforce_final_time_zero() {
    lambda[lattice.nt].fill(0.0);
    A[lattice.nt].fill(0.0);
  }
};

// Flat layout for the optimizer: per level 0..nt-1 the free lambda and A
// fields, then mu at all nt+1 levels. The pinned final-time lambda and A
// are not degrees of freedom.
inline std::size_t dual_dof_count(const SpaceTimeLattice& lat) {
  const std::size_t np = lat.grid.points();
  return static_cast<std::size_t>(lat.nt) * 12 * np +
         static_cast<std::size_t>(lat.nt + 1) * np;
}

inline std::vector<Real> to_flat(const DualState& d) {
  const std::size_t np = d.lattice.grid.points();
  std::vector<Real> x;
  x.reserve(dual_dof_count(d.lattice));
  for (int l = 0; l < d.lattice.nt; ++l) {
    x.insert(x.end(), d.lambda[l].data.begin(), d.lambda[l].data.end());
    x.insert(x.end(), d.A[l].data.begin(), d.A[l].data.end());
  }
  for (int l = 0; l <= d.lattice.nt; ++l)
    x.insert(x.end(), d.mu[l].data.begin(), d.mu[l].data.end());
  (void)np;
  return x;
}

inline DualState from_flat(const SpaceTimeLattice& lat, const std::vector<Real>& x) {
  if (x.size() != dual_dof_count(lat))
    throw ArgumentError("from_flat: size mismatch");
  DualState d(lat);
  std::size_t pos = 0;
  const std::size_t np = lat.grid.points();
  for (int l = 0; l < lat.nt; ++l) {
    std::copy(x.begin() + pos, x.begin() + pos + 3 * np, d.lambda[l].data.begin());
    pos += 3 * np;
    std::copy(x.begin() + pos, x.begin() + pos + 9 * np, d.A[l].data.begin());
    pos += 9 * np;
  }
  for (int l = 0; l <= lat.nt; ++l) {
    std::copy(x.begin() + pos, x.begin() + pos + np, d.mu[l].data.begin());
    pos += np;
  }
  d.enforce_final_time_zero();
  return d;
}

// Spatial-slot fields of the packed dual gradient on one interval, before
// per-point gathering. Held as plain component arrays.
struct IntervalSlotFields {
  // 51 scalar component arrays indexed by the packed D slot.
  std::vector<std::vector<Real>> slot;
  explicit IntervalSlotFields(std::size_t np)
      : slot(kND, std::vector<Real>(np, 0.0)) {}
};

// Packed dual gradient on interval k, one PackedD per spatial point.
inline std::vector<PackedD> interval_calD(const DualState& d, int k,
                                          Backend backend) {
  const SpaceTimeLattice& lat = d.lattice;
  const PeriodicGrid& g = lat.grid;
  const std::size_t np = g.points();
  const Real inv_dt = 1.0 / lat.dt();

  IntervalSlotFields sf(np);

  // Time-derivative slots.
  for (int i = 0; i < 3; ++i) {
    const Real* lo = d.lambda[k].comp(i);
    const Real* hi = d.lambda[k + 1].comp(i);
    Real* out = sf.slot[dslot_lt(i)].data();
    for (std::size_t q = 0; q < np; ++q) out[q] = (hi[q] - lo[q]) * inv_dt;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Real* lo = d.A[k].comp(tensor_comp(i, j));
      const Real* hi = d.A[k + 1].comp(tensor_comp(i, j));
      Real* out = sf.slot[dslot_At(i, j)].data();
      for (std::size_t q = 0; q < np; ++q) out[q] = (hi[q] - lo[q]) * inv_dt;
    }

  // Spatial slots on time-averaged fields.
  Field lam_avg = lincomb(0.5, d.lambda[k], 0.5, d.lambda[k + 1]);
  Field A_avg = lincomb(0.5, d.A[k], 0.5, d.A[k + 1]);
  Field mu_avg = lincomb(0.5, d.mu[k], 0.5, d.mu[k + 1]);

  std::vector<Real> tmp(np);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      detail::axis_derivative(g, lam_avg.comp(i), j, backend, false, tmp.data());
      sf.slot[dslot_G(i, j)] = tmp;
    }
  for (int i = 0; i < 3; ++i) {
    detail::axis_derivative(g, mu_avg.comp(0), i, backend, false, tmp.data());
    sf.slot[dslot_gmu(i)] = tmp;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int r = 0; r < 3; ++r) {
        detail::axis_derivative(g, A_avg.comp(tensor_comp(i, j)), r, backend,
                                false, tmp.data());
        sf.slot[dslot_H(i, j, r)] = tmp;
      }

  std::vector<PackedD> out(np);
  for (std::size_t q = 0; q < np; ++q)
    for (int s = 0; s < kND; ++s) out[q][s] = sf.slot[s][q];
  return out;
}

// All intervals materialized; convenience for tests and small lattices.
inline std::vector<std::vector<PackedD>> compute_calD(const DualState& d,
                                                      Backend backend) {
  std::vector<std::vector<PackedD>> out;
  out.reserve(d.lattice.nt);
  for (int k = 0; k < d.lattice.nt; ++k)
    out.push_back(interval_calD(d, k, backend));
  return out;
}

// Packed base state per point of a PrimalState.
inline std::vector<PackedU> pack_state(const PrimalState& s) {
  const std::size_t np = s.v.points();
  std::vector<PackedU> out(np);
  for (int i = 0; i < 3; ++i) {
    const Real* c = s.v.comp(i);
    for (std::size_t q = 0; q < np; ++q) out[q][slot_v(i)] = c[q];
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Real* c = s.alpha.comp(tensor_comp(i, j));
      for (std::size_t q = 0; q < np; ++q) out[q][slot_alpha(i, j)] = c[q];
    }
  {
    const Real* c = s.p.comp(0);
    for (std::size_t q = 0; q < np; ++q) out[q][kSlotP] = c[q];
  }
  return out;
}

inline PrimalState unpack_state(const PeriodicGrid& g,
                                const std::vector<PackedU>& pts) {
  if (pts.size() != g.points()) throw ArgumentError("unpack_state: size mismatch");
  PrimalState s(g);
  for (std::size_t q = 0; q < pts.size(); ++q) {
    for (int i = 0; i < 3; ++i) s.v.comp(i)[q] = pts[q][slot_v(i)];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        s.alpha.comp(tensor_comp(i, j))[q] = pts[q][slot_alpha(i, j)];
    s.p.comp(0)[q] = pts[q][kSlotP];
  }
  return s;
}

}  // namespace ifdm
