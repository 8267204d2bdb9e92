// The ideal FDM system: fluxes, transport, the MHD row embedding, and
// conserved-quantity diagnostics (energy, the helicity analog, divergence
// constraints).
//
// State U = (v, alpha, p): velocity, 3x3 dislocation density whose rows are
// the transported vector fields, and pressure. Under the row embedding the
// system reduces to incompressible ideal MHD with alpha's nonzero row as B.
#pragma once

#include <array>
#include <vector>

#include "ifdm/grid.hpp"
#include "ifdm/operators.hpp"

namespace ifdm {

struct PrimalState {
  Field v;      // 3 components
  Field alpha;  // 9 components, row-major
  Field p;      // 1 component

  PrimalState() = default;
  explicit PrimalState(const PeriodicGrid& g)
      : v(make_vector(g)), alpha(make_tensor(g)), p(make_scalar(g)) {}

  const PeriodicGrid& grid() const { return v.grid; }

  bool operator==(const PrimalState&) const = default;
};

inline void require_finite(const PrimalState& s, const char* op) {
  require_finite(s.v, op);
  require_finite(s.alpha, op);
  require_finite(s.p, op);
}

struct ConservationReport {
  Real time = 0.0;
  Real energy = 0.0;
  std::array<Real, 3> helicity_per_row{0.0, 0.0, 0.0};
  Real helicity_total = 0.0;
  Real div_v_norm = 0.0;      // max norm
  Real div_alpha_norm = 0.0;  // max norm over rows
};

// Momentum flux sigma_{ij} = v_i v_j - alpha_{ki} alpha_{kj} + p delta_{ij}.
// Symmetric by construction.
inline Field momentum_flux(const PrimalState& s) {
  require_finite(s, "momentum_flux");
  const std::size_t np = s.v.points();
  Field sigma = make_tensor(s.grid());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Real* out = sigma.comp(tensor_comp(i, j));
      const Real* vi = s.v.comp(i);
      const Real* vj = s.v.comp(j);
      for (std::size_t q = 0; q < np; ++q) out[q] = vi[q] * vj[q];
      for (int k = 0; k < 3; ++k) {
        const Real* aki = s.alpha.comp(tensor_comp(k, i));
        const Real* akj = s.alpha.comp(tensor_comp(k, j));
        for (std::size_t q = 0; q < np; ++q) out[q] -= aki[q] * akj[q];
      }
      if (i == j) {
        const Real* p = s.p.comp(0);
        for (std::size_t q = 0; q < np; ++q) out[q] += p[q];
      }
    }
  return sigma;
}

// Row-wise cross product (alpha x v)_{ip} = e_{pms} alpha_{im} v_s.
inline Field cross_rowwise(const Field& alpha, const Field& v) {
  const std::size_t np = alpha.points();
  Field T = make_tensor(alpha.grid);
  for (int i = 0; i < 3; ++i)
    for (int p = 0; p < 3; ++p) {
      Real* out = T.comp(tensor_comp(i, p));
      for (int m = 0; m < 3; ++m)
        for (int sidx = 0; sidx < 3; ++sidx) {
          const int e = levi_civita(p, m, sidx);
          if (e == 0) continue;
          const Real* am = alpha.comp(tensor_comp(i, m));
          const Real* vs = v.comp(sidx);
          for (std::size_t q = 0; q < np; ++q)
            out[q] += static_cast<Real>(e) * am[q] * vs[q];
        }
    }
  return T;
}

// d alpha/dt of the ideal transport law: -curl_rowwise(alpha x v).
inline Field transport_rhs(const Field& alpha, const Field& v,
                           Backend backend = Backend::spectral,
                           bool dealias = false) {
  require_finite(alpha, "transport_rhs");
  require_finite(v, "transport_rhs");
  Field rhs = curl_rowwise(cross_rowwise(alpha, v), backend, dealias);
  scale(rhs, -1.0);
  return rhs;
}

// Place B in one row of an otherwise zero alpha; row in 1..3. Guarantees
// alpha^T alpha = B (x) B and row-wise transport = the MHD induction law.
inline Field embed_mhd(const Field& B, int row = 1) {
  if (B.comps != 3) throw ArgumentError("embed_mhd: vector field expected");
  if (row < 1 || row > 3) throw ArgumentError("embed_mhd: row must be in 1..3");
  require_finite(B, "embed_mhd");
  Field alpha = make_tensor(B.grid);
  for (int j = 0; j < 3; ++j) {
    Real* dst = alpha.comp(tensor_comp(row - 1, j));
    const Real* src = B.comp(j);
    for (std::size_t q = 0; q < B.points(); ++q) dst[q] = src[q];
  }
  return alpha;
}

inline Field extract_row(const Field& T, int row = 1) {
  if (T.comps != 9) throw ArgumentError("extract_row: tensor field expected");
  if (row < 1 || row > 3) throw ArgumentError("extract_row: row must be in 1..3");
  Field B = make_vector(T.grid);
  for (int j = 0; j < 3; ++j) {
    Real* dst = B.comp(j);
    const Real* src = T.comp(tensor_comp(row - 1, j));
    for (std::size_t q = 0; q < T.points(); ++q) dst[q] = src[q];
  }
  return B;
}

struct HelicityResult {
  std::array<Real, 3> per_row{0.0, 0.0, 0.0};
  Real total = 0.0;
  Field chi;  // the gauge-fixed vector potential, for diagnostics/tests
};

// Helicity analog per row: integral of chi_row . alpha_row with
// curl chi = alpha in the divergence-free, zero-mean gauge. Each row of
// alpha must be mean-free (else no periodic potential exists) and
// divergence-free (else the potential problem is ill-posed).
inline HelicityResult helicity(const Field& alpha) {
  if (alpha.comps != 9) throw ArgumentError("helicity: tensor field expected");
  require_finite(alpha, "helicity");
  for (int row = 0; row < 3; ++row)
    for (int j = 0; j < 3; ++j) {
      const Real m = mean(alpha, tensor_comp(row, j));
      if (std::abs(m) > 1e-8)
        throw NotCurlSolvableError("helicity: alpha row " + std::to_string(row + 1) +
                                   " has nonzero mean");
    }
  Field diva = div_tensor_rowwise(alpha, Backend::spectral);
  if (max_abs(diva) > 1e-6)
    throw IllPosedPotentialError("helicity: div alpha exceeds 1e-6");

  HelicityResult res;
  res.chi = vector_potential_rowwise(alpha);
  const Real dv = alpha.grid.cell_volume();
  for (int row = 0; row < 3; ++row) {
    Real s = 0.0;
    for (int j = 0; j < 3; ++j) {
      const Real* c = res.chi.comp(tensor_comp(row, j));
      const Real* a = alpha.comp(tensor_comp(row, j));
      for (std::size_t q = 0; q < alpha.points(); ++q) s += c[q] * a[q];
    }
    res.per_row[row] = s * dv;
  }
  res.total = res.per_row[0] + res.per_row[1] + res.per_row[2];
  return res;
}

// Total energy 0.5 * integral(|v|^2 + |alpha|^2) under uniform quadrature.
inline Real energy(const PrimalState& s) {
  require_finite(s, "energy");
  Real acc = 0.0;
  for (Real x : s.v.data) acc += x * x;
  for (Real x : s.alpha.data) acc += x * x;
  return 0.5 * acc * s.grid().cell_volume();
}

inline ConservationReport conservation_report(const PrimalState& s, Real time = 0.0) {
  ConservationReport rep;
  rep.time = time;
  rep.energy = energy(s);
  rep.div_v_norm = max_abs(div_vector(s.v, Backend::spectral));
  rep.div_alpha_norm = max_abs(div_tensor_rowwise(s.alpha, Backend::spectral));
  HelicityResult h = helicity(s.alpha);
  rep.helicity_per_row = h.per_row;
  rep.helicity_total = h.total;
  return rep;
}

struct ResidualNorms {
  Real momentum = 0.0;   // max |d_t v + div sigma|
  Real transport = 0.0;  // max |d_t alpha - transport_rhs|
  Real div_v = 0.0;
  Real div_alpha = 0.0;
};

// Discrete residuals of the full system over a stored time series with
// uniform spacing dt. Time derivative is centered 2nd order; endpoints use
// one-sided 2nd order.
inline ResidualNorms primal_residual(const std::vector<PrimalState>& traj, Real dt,
                                     Backend backend = Backend::spectral) {
  if (traj.size() < 3)
    throw InsufficientDataError("primal_residual: need at least 3 time levels");
  if (!(dt > 0.0)) throw ArgumentError("primal_residual: dt must be positive");
  const std::size_t nlev = traj.size();
  ResidualNorms out;

  auto time_derivative = [&](std::size_t lev, auto&& get) {
    if (lev == 0) {
      Field d = lincomb(-3.0, get(traj[0]), 4.0, get(traj[1]));
      axpy(-1.0, get(traj[2]), d);
      scale(d, 1.0 / (2.0 * dt));
      return d;
    }
    if (lev == nlev - 1) {
      Field d = lincomb(3.0, get(traj[nlev - 1]), -4.0, get(traj[nlev - 2]));
      axpy(1.0, get(traj[nlev - 3]), d);
      scale(d, 1.0 / (2.0 * dt));
      return d;
    }
    Field d = lincomb(0.5 / dt, get(traj[lev + 1]), -0.5 / dt, get(traj[lev - 1]));
    return d;
  };

  for (std::size_t lev = 0; lev < nlev; ++lev) {
    const PrimalState& s = traj[lev];
    Field dv = time_derivative(lev, [](const PrimalState& st) { return st.v; });
    axpy(1.0, div_tensor_rowwise(momentum_flux(s), backend), dv);
    out.momentum = std::max(out.momentum, max_abs(dv));

    Field da = time_derivative(lev, [](const PrimalState& st) { return st.alpha; });
    axpy(-1.0, transport_rhs(s.alpha, s.v, backend), da);
    out.transport = std::max(out.transport, max_abs(da));

    out.div_v = std::max(out.div_v, max_abs(div_vector(s.v, backend)));
    out.div_alpha =
        std::max(out.div_alpha, max_abs(div_tensor_rowwise(s.alpha, backend)));
  }
  return out;
}

}  // namespace ifdm
