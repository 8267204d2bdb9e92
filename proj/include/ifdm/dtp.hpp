// Dual-to-primal mapping: per space-time point, solve
//
//   K|_D (U - Ubar) = -(M + B Ubar) D,   K|_D = diag(a) + D.B
//
// for the mapped primal point U_hat. K must be symmetric positive definite;
// a failed Cholesky is a signal (the optimizer shrinks its step), not a
// crash. Solves carry one step of iterative refinement and report the
// infinity-norm residual of dL/dU at U_hat.
#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "ifdm/packed.hpp"

namespace ifdm {

struct Cholesky13 {
  Mat13 L{};           // lower triangular factor
  Real min_pivot = 0;  // smallest diagonal remainder before sqrt
  bool ok = false;

  // Factor a symmetric matrix; fails when any pivot falls at or below floor.
  static Cholesky13 factor(const Mat13& K, Real pivot_floor) {
    Cholesky13 c;
    Mat13& L = c.L;
    c.min_pivot = std::numeric_limits<Real>::infinity();
    for (int i = 0; i < kNU; ++i) {
      for (int j = 0; j <= i; ++j) {
        Real s = K[i * kNU + j];
        for (int k = 0; k < j; ++k) s -= L[i * kNU + k] * L[j * kNU + k];
        if (i == j) {
          c.min_pivot = std::min(c.min_pivot, s);
          if (s <= pivot_floor) return c;  // ok stays false
          L[i * kNU + i] = std::sqrt(s);
        } else {
          L[i * kNU + j] = s / L[j * kNU + j];
        }
      }
    }
    c.ok = true;
    return c;
  }

  std::array<Real, kNU> solve(const std::array<Real, kNU>& b) const {
    std::array<Real, kNU> y{};
    for (int i = 0; i < kNU; ++i) {
      Real s = b[i];
      for (int k = 0; k < i; ++k) s -= L[i * kNU + k] * y[k];
      y[i] = s / L[i * kNU + i];
    }
    std::array<Real, kNU> x{};
    for (int i = kNU - 1; i >= 0; --i) {
      Real s = y[i];
      for (int k = i + 1; k < kNU; ++k) s -= L[k * kNU + i] * x[k];
      x[i] = s / L[i * kNU + i];
    }
    return x;
  }
};

struct DtpResult {
  PackedU u_hat{};
  Real min_pivot = 0.0;       // smallest Cholesky pivot of K
  Real residual_norm = 0.0;   // max |dL/dU(u_hat)|
  bool ok = false;
};

inline Real pivot_floor(const AuxWeights& aw) { return 1e-10 * aw.max(); }

// Right-hand side -(M_{I Gamma} + B_{Gamma I K} Ubar_K) D_Gamma.
inline std::array<Real, kNU> dtp_rhs(const PackedD& d, const PackedU& ubar,
                                     const OperatorTables& t) {
  std::array<Real, kNU> rhs{};
  for (const MEntry& e : t.M) rhs[e.u] -= e.value * d[e.d];
  for (const BEntry& e : t.B) rhs[e.j] -= e.value * ubar[e.k] * d[e.d];
  return rhs;
}

inline DtpResult dtp_solve(const PackedD& d, const PackedU& ubar,
                           const AuxWeights& aw,
                           const OperatorTables& t = operator_tables()) {
  for (Real x : d)
    if (!std::isfinite(x)) throw InvalidFieldError("dtp_solve: non-finite dual point");
  for (Real x : ubar)
    if (!std::isfinite(x)) throw InvalidFieldError("dtp_solve: non-finite base point");
  aw.validate();

  DtpResult res;
  const Mat13 K = K_at(d, aw, t);
  const Cholesky13 chol = Cholesky13::factor(K, pivot_floor(aw));
  res.min_pivot = chol.min_pivot;
  if (!chol.ok) return res;

  const std::array<Real, kNU> rhs = dtp_rhs(d, ubar, t);
  std::array<Real, kNU> du = chol.solve(rhs);

  // One refinement pass keeps the substitute-back residual near roundoff.
  std::array<Real, kNU> resid = rhs;
  for (int i = 0; i < kNU; ++i)
    for (int j = 0; j < kNU; ++j) resid[i] -= K[i * kNU + j] * du[j];
  const std::array<Real, kNU> corr = chol.solve(resid);
  for (int i = 0; i < kNU; ++i) du[i] += corr[i];

  for (int i = 0; i < kNU; ++i) res.u_hat[i] = ubar[i] + du[i];
  const PackedU g = dL_dU(res.u_hat, d, ubar, aw, t);
  for (Real x : g) res.residual_norm = std::max(res.residual_norm, std::abs(x));
  res.ok = true;
  return res;
}

struct DtpFieldResult {
  std::vector<PackedU> u_hat;   // valid entries up to the first failure
  Real min_pivot = std::numeric_limits<Real>::infinity();
  Real max_residual = 0.0;
  bool ok = true;
  std::ptrdiff_t first_failure = -1;          // point index, -1 if none
  std::vector<std::ptrdiff_t> failures;       // filled in collect-all mode
};

// Pointwise mapping over a lattice of packed points. Stops at the first
// failure unless collect_all is set.
inline DtpFieldResult dtp_solve_field(const std::vector<PackedD>& d,
                                      const std::vector<PackedU>& ubar,
                                      const AuxWeights& aw,
                                      bool collect_all = false,
                                      const OperatorTables& t = operator_tables()) {
  if (d.size() != ubar.size())
    throw ArgumentError("dtp_solve_field: size mismatch between dual and base");
  DtpFieldResult out;
  out.u_hat.resize(d.size());
  for (std::size_t q = 0; q < d.size(); ++q) {
    DtpResult r = dtp_solve(d[q], ubar[q], aw, t);
    out.min_pivot = std::min(out.min_pivot, r.min_pivot);
    if (!r.ok) {
      out.ok = false;
      if (out.first_failure < 0) out.first_failure = static_cast<std::ptrdiff_t>(q);
      if (!collect_all) return out;
      out.failures.push_back(static_cast<std::ptrdiff_t>(q));
      continue;
    }
    out.max_residual = std::max(out.max_residual, r.residual_norm);
    out.u_hat[q] = r.u_hat;
  }
  return out;
}

}  // namespace ifdm
