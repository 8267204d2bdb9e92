// Per-point algebra of the dual scheme.
//
// The primal point U packs into 13 slots and the dual-gradient point D into
// 51 slots. The constraint Lagrangian is then
//
//   L(U, D) = U . M D + 1/2 D . B : (U (x) U) + 1/2 (U - Ubar) . a (U - Ubar)
//
// with constant sparse tables M (13x51) and B (51x13x13, symmetric in the
// last two slots) and diagonal weights a. Everything downstream (the
// dual-to-primal solve, the dual functional and its gradient) is built from
// these tables, so their entries are the single source of truth for the
// system being dualized.
//
// Slot conventions (0-based internally; documentation uses 1-based):
//   U: 0-2 v_i | 3-11 alpha_ij row-major | 12 p
//   D: 0-2 dt(lambda)_i | 3-11 G_ij = d_j lambda_i | 12-14 d_i mu
//      | 15-23 dt(A)_ij | 24-50 H_ijr = d_r A_ij, r fastest
#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <tuple>
#include <vector>

#include "ifdm/core.hpp"

namespace ifdm {

inline constexpr int kNU = 13;  // primal slots
inline constexpr int kND = 51;  // dual-gradient slots

using PackedU = std::array<Real, kNU>;
using PackedD = std::array<Real, kND>;
using Mat13 = std::array<Real, kNU * kNU>;  // row-major 13x13

// --- slot maps (0-based indices) ---
constexpr int slot_v(int i) { return i; }
constexpr int slot_alpha(int i, int j) { return 3 + 3 * i + j; }
inline constexpr int kSlotP = 12;

constexpr int dslot_lt(int i) { return i; }                       // dt lambda_i
constexpr int dslot_G(int i, int j) { return 3 + 3 * i + j; }     // d_j lambda_i
constexpr int dslot_gmu(int i) { return 12 + i; }                 // d_i mu
constexpr int dslot_At(int i, int j) { return 15 + 3 * i + j; }   // dt A_ij
constexpr int dslot_H(int i, int j, int r) { return 24 + 9 * i + 3 * j + r; }

// Quadratic weights of the auxiliary potential, 1 << a.
struct AuxWeights {
  Real a_v = 100.0;
  Real a_alpha = 100.0;
  Real a_p = 100.0;

  std::array<Real, kNU> diagonal() const {
    std::array<Real, kNU> a{};
    for (int i = 0; i < 3; ++i) a[slot_v(i)] = a_v;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a[slot_alpha(i, j)] = a_alpha;
    a[kSlotP] = a_p;
    return a;
  }
  Real max() const { return std::max(a_v, std::max(a_alpha, a_p)); }

  void validate() const {
    if (!(a_v > 0.0) || !(a_alpha > 0.0) || !(a_p > 0.0))
      throw ArgumentError("AuxWeights: entries must be positive");
  }
};

struct MEntry {
  int u;  // U slot
  int d;  // D slot
  Real value;
};

struct BEntry {
  int d;  // D slot (Gamma)
  int j;  // first U slot
  int k;  // second U slot
  Real value;
};

struct OperatorTables {
  std::vector<MEntry> M;  // 18 nonzeros
  std::vector<BEntry> B;  // symmetric in (j,k); both orders stored
};

// Linear couplings: -v_i dt(lambda_i), -v_i d_i mu, -p d_i lambda_i,
// -alpha_ij dt(A_ij). Exactly 18 nonzeros, all -1.
inline std::vector<MEntry> assemble_M() {
  std::vector<MEntry> m;
  for (int i = 0; i < 3; ++i) m.push_back({slot_v(i), dslot_lt(i), -1.0});
  for (int i = 0; i < 3; ++i) m.push_back({slot_v(i), dslot_gmu(i), -1.0});
  for (int i = 0; i < 3; ++i) m.push_back({kSlotP, dslot_G(i, i), -1.0});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      m.push_back({slot_alpha(i, j), dslot_At(i, j), -1.0});
  return m;
}

// Quadratic couplings, symmetrized so that 1/2 D.B:(U(x)U) reproduces the
// quadratic terms -v_i v_j G_ij + alpha_ki alpha_kj G_ij
// - e_{pjr} e_{pms} alpha_im v_s H_ijr exactly.
inline std::vector<BEntry> assemble_B() {
  std::map<std::tuple<int, int, int>, Real> acc;
  auto add = [&acc](int d, int j, int k, Real v) {
    acc[{d, j, k}] += v;
  };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      add(dslot_G(i, j), slot_v(i), slot_v(j), -1.0);
      add(dslot_G(i, j), slot_v(j), slot_v(i), -1.0);
      for (int k = 0; k < 3; ++k) {
        add(dslot_G(i, j), slot_alpha(k, i), slot_alpha(k, j), 1.0);
        add(dslot_G(i, j), slot_alpha(k, j), slot_alpha(k, i), 1.0);
      }
    }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int r = 0; r < 3; ++r)
        for (int m = 0; m < 3; ++m)
          for (int s = 0; s < 3; ++s) {
            Real c = 0.0;
            for (int p = 0; p < 3; ++p)
              c -= static_cast<Real>(levi_civita(p, j, r) * levi_civita(p, m, s));
            if (c == 0.0) continue;
            add(dslot_H(i, j, r), slot_alpha(i, m), slot_v(s), c);
            add(dslot_H(i, j, r), slot_v(s), slot_alpha(i, m), c);
          }
  std::vector<BEntry> b;
  b.reserve(acc.size());
  for (const auto& [key, v] : acc) {
    if (v == 0.0) continue;
    b.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v});
  }
  return b;
}

inline const OperatorTables& operator_tables() {
  static const OperatorTables t{assemble_M(), assemble_B()};
  return t;
}

// 1/2 D . B : (U (x) U)
inline Real quadratic_part(const PackedU& u, const PackedD& d,
                           const OperatorTables& t = operator_tables()) {
  Real s = 0.0;
  for (const BEntry& e : t.B) s += d[e.d] * e.value * u[e.j] * u[e.k];
  return 0.5 * s;
}

// L from the assembled tables.
inline Real lagrangian_packed(const PackedU& u, const PackedD& d,
                              const PackedU& ubar, const AuxWeights& aw,
                              const OperatorTables& t = operator_tables()) {
  Real s = 0.0;
  for (const MEntry& e : t.M) s += u[e.u] * e.value * d[e.d];
  s += quadratic_part(u, d, t);
  const std::array<Real, kNU> a = aw.diagonal();
  for (int i = 0; i < kNU; ++i) {
    const Real r = u[i] - ubar[i];
    s += 0.5 * a[i] * r * r;
  }
  return s;
}

// L written out term by term from its defining formula; kept free of the
// tables on purpose so the two routes cross-check each other.
inline Real lagrangian_direct(const PackedU& u, const PackedD& d,
                              const PackedU& ubar, const AuxWeights& aw) {
  const Real* v = &u[slot_v(0)];
  const Real p = u[kSlotP];
  auto alpha = [&u](int i, int j) { return u[slot_alpha(i, j)]; };
  auto G = [&d](int i, int j) { return d[dslot_G(i, j)]; };

  Real s = 0.0;
  for (int i = 0; i < 3; ++i) s -= v[i] * d[dslot_lt(i)];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Real flux = v[i] * v[j];
      for (int k = 0; k < 3; ++k) flux -= alpha(k, i) * alpha(k, j);
      if (i == j) flux += p;
      s -= flux * G(i, j);
    }
  for (int i = 0; i < 3; ++i) s -= v[i] * d[dslot_gmu(i)];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s -= alpha(i, j) * d[dslot_At(i, j)];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int r = 0; r < 3; ++r)
        for (int m = 0; m < 3; ++m)
          for (int sx = 0; sx < 3; ++sx) {
            int e = 0;
            for (int pp = 0; pp < 3; ++pp)
              e += levi_civita(pp, j, r) * levi_civita(pp, m, sx);
            if (e == 0) continue;
            s -= static_cast<Real>(e) * alpha(i, m) * v[sx] * d[dslot_H(i, j, r)];
          }
  Real h = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Real r = v[i] - ubar[slot_v(i)];
    h += aw.a_v * r * r;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Real r = alpha(i, j) - ubar[slot_alpha(i, j)];
      h += aw.a_alpha * r * r;
    }
  {
    const Real r = p - ubar[kSlotP];
    h += aw.a_p * r * r;
  }
  return s + 0.5 * h;
}

// K|_D = diag(a) + D_Gamma B_Gamma, the symmetric system matrix of the
// per-point dual-to-primal solve.
inline Mat13 K_at(const PackedD& d, const AuxWeights& aw,
                  const OperatorTables& t = operator_tables()) {
  Mat13 K{};
  const std::array<Real, kNU> a = aw.diagonal();
  for (int i = 0; i < kNU; ++i) K[i * kNU + i] = a[i];
  for (const BEntry& e : t.B) K[e.j * kNU + e.k] += d[e.d] * e.value;
  return K;
}

// dL/dD at fixed U: slot Gamma = U_I M_{I Gamma} + 1/2 B_{Gamma J K} U_J U_K.
// This is the envelope derivative used to assemble the dual gradient.
inline PackedD envelope_dL_dD(const PackedU& u,
                              const OperatorTables& t = operator_tables()) {
  PackedD g{};
  for (const MEntry& e : t.M) g[e.d] += u[e.u] * e.value;
  for (const BEntry& e : t.B) g[e.d] += 0.5 * e.value * u[e.j] * u[e.k];
  return g;
}

// dL/dU at (U, D): M D + a (U - Ubar) + (D.B) U.
inline PackedU dL_dU(const PackedU& u, const PackedD& d, const PackedU& ubar,
                     const AuxWeights& aw,
                     const OperatorTables& t = operator_tables()) {
  PackedU g{};
  for (const MEntry& e : t.M) g[e.u] += e.value * d[e.d];
  const std::array<Real, kNU> a = aw.diagonal();
  for (int i = 0; i < kNU; ++i) g[i] += a[i] * (u[i] - ubar[i]);
  for (const BEntry& e : t.B) g[e.j] += d[e.d] * e.value * u[e.k];
  return g;
}

}  // namespace ifdm
