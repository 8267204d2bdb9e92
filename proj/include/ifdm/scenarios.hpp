// Scenario library: the analytically exact reference states (constants,
// Beltrami/Alfven stationary states, MHD row embeddings) plus seeded smooth
// random states for conservation and recovery experiments.
//
// All random constructions are divergence-free by construction (curls of
// random low-mode potentials), so they satisfy the admissibility
// constraints and have well-defined helicity. Random alpha rows carry a
// Beltrami bias so the total helicity is O(1) and relative drift is
// meaningful.
#pragma once

#include <random>
#include <string>

#include "ifdm/lattice.hpp"
#include "ifdm/primal.hpp"

namespace ifdm {

// v = (1,0,0), alpha = 0, p = 0: an exact solution with zero residual.
inline PrimalState scenario_constant(const PeriodicGrid& g) {
  PrimalState s(g);
  for (std::size_t q = 0; q < g.points(); ++q) s.v.comp(0)[q] = 1.0;
  return s;
}

// The unit Beltrami field (sin 2pi x3, cos 2pi x3, 0): curl B = 2pi B,
// |B| = 1 pointwise.
inline Field beltrami_field(const PeriodicGrid& g) {
  Field B = make_vector(g);
  for (int i3 = 0; i3 < g.n; ++i3)
    for (int i2 = 0; i2 < g.n; ++i2)
      for (int i1 = 0; i1 < g.n; ++i1) {
        const std::size_t q = g.idx(i1, i2, i3);
        const Real x3 = i3 * g.h();
        B.comp(0)[q] = std::sin(kTwoPi * x3);
        B.comp(1)[q] = std::cos(kTwoPi * x3);
      }
  return B;
}

// Stationary Alfven state: v = B, alpha = row-1 embedding of B, p = 0.
// The momentum flux collapses to a constant and the transport term to
// B x B = 0, so the state is an exact steady solution.
inline PrimalState scenario_beltrami_alfven(const PeriodicGrid& g) {
  PrimalState s(g);
  Field B = beltrami_field(g);
  s.v = B;
  s.alpha = embed_mhd(B, 1);
  return s;
}

// Divergence-free random field: curl of a random potential with modes
// |k_i| <= kmax, scaled to the requested max norm.
inline Field random_curl_field(const PeriodicGrid& g, std::uint64_t seed,
                               Real target_max = 0.4, int kmax = 2) {
  std::mt19937_64 rng(seed);
  Field v = make_vector(g);
  // One representative per +-k pair; k = 0 contributes nothing to a curl.
  for (int k3 = -kmax; k3 <= kmax; ++k3)
    for (int k2 = -kmax; k2 <= kmax; ++k2)
      for (int k1 = -kmax; k1 <= kmax; ++k1) {
        if (k1 == 0 && k2 == 0 && k3 == 0) continue;
        if (k3 < 0 || (k3 == 0 && (k2 < 0 || (k2 == 0 && k1 < 0)))) continue;
        Real a[3], b[3];
        for (int c = 0; c < 3; ++c) {
          a[c] = uniform_pm1(rng);
          b[c] = uniform_pm1(rng);
        }
        const Real kk[3] = {static_cast<Real>(k1), static_cast<Real>(k2),
                            static_cast<Real>(k3)};
        const Real decay = 1.0 / (1.0 + kk[0] * kk[0] + kk[1] * kk[1] + kk[2] * kk[2]);
        for (int i3 = 0; i3 < g.n; ++i3)
          for (int i2 = 0; i2 < g.n; ++i2)
            for (int i1 = 0; i1 < g.n; ++i1) {
              const std::size_t q = g.idx(i1, i2, i3);
              const Real phase =
                  kTwoPi * (kk[0] * i1 + kk[1] * i2 + kk[2] * i3) * g.h();
              const Real sn = std::sin(phase), cs = std::cos(phase);
              // v_p += e_{pqr} d_q psi_r with psi_r = a_r cos + b_r sin.
              for (int p = 0; p < 3; ++p)
                for (int qq = 0; qq < 3; ++qq)
                  for (int r = 0; r < 3; ++r) {
                    const int e = levi_civita(p, qq, r);
                    if (e == 0) continue;
                    const Real dpsi = kTwoPi * kk[qq] * (-a[r] * sn + b[r] * cs);
                    v.comp(p)[q] += static_cast<Real>(e) * decay * dpsi;
                  }
            }
      }
  const Real m = max_abs(v);
  if (m > 0.0) scale(v, target_max / m);
  return v;
}

// Unit Beltrami eigenfields along the three axes, used to bias the helicity
// of random alpha rows.
inline Field axis_beltrami(const PeriodicGrid& g, int axis) {
  Field B = make_vector(g);
  for (int i3 = 0; i3 < g.n; ++i3)
    for (int i2 = 0; i2 < g.n; ++i2)
      for (int i1 = 0; i1 < g.n; ++i1) {
        const std::size_t q = g.idx(i1, i2, i3);
        const Real x[3] = {i1 * g.h(), i2 * g.h(), i3 * g.h()};
        const Real s = std::sin(kTwoPi * x[axis]);
        const Real c = std::cos(kTwoPi * x[axis]);
        // (sin, cos, 0) cycled so the field is transverse to its axis.
        B.comp((axis + 1) % 3)[q] = s;
        B.comp((axis + 2) % 3)[q] = c;
      }
  return B;
}

// Smooth random admissible state: div-free v, div-free mean-free alpha rows
// with O(1) total helicity.
inline PrimalState scenario_random_smooth(const PeriodicGrid& g, std::uint64_t seed) {
  PrimalState s(g);
  s.v = random_curl_field(g, seed * 6364136223846793005ull + 1, 0.4);
  for (int row = 0; row < 3; ++row) {
    Field bias = axis_beltrami(g, (row + 2) % 3);
    Field rnd = random_curl_field(g, seed * 6364136223846793005ull + 2 + row, 0.15);
    for (int j = 0; j < 3; ++j) {
      Real* dst = s.alpha.comp(tensor_comp(row, j));
      const Real* b = bias.comp(j);
      const Real* r = rnd.comp(j);
      for (std::size_t q = 0; q < g.points(); ++q) dst[q] = 0.3 * b[q] + r[q];
    }
  }
  return s;
}

// Random divergence-free B embedded in row 1, independent random v.
inline PrimalState scenario_mhd_embed(const PeriodicGrid& g, std::uint64_t seed) {
  PrimalState s(g);
  s.v = random_curl_field(g, seed * 2862933555777941757ull + 11, 0.4);
  Field B = random_curl_field(g, seed * 2862933555777941757ull + 12, 0.4);
  s.alpha = embed_mhd(B, 1);
  return s;
}

inline PrimalState make_scenario(const std::string& name, const PeriodicGrid& g,
                                 std::uint64_t seed) {
  if (name == "constant") return scenario_constant(g);
  if (name == "beltrami_alfven") return scenario_beltrami_alfven(g);
  if (name == "random_smooth") return scenario_random_smooth(g, seed);
  if (name == "mhd_embed") return scenario_mhd_embed(g, seed);
  throw ArgumentError("make_scenario: unknown or file-based scenario '" + name + "'");
}

// Divergence-free pollution of a state: v and each alpha row are shifted by
// independent random curl fields of the given magnitude. Admissibility is
// preserved exactly.
inline PrimalState perturb_state(const PrimalState& s, std::uint64_t seed,
                                 Real amplitude) {
  PrimalState out = s;
  Field dv = random_curl_field(s.grid(), seed * 0x9E3779B97F4A7C15ull + 101, amplitude);
  axpy(1.0, dv, out.v);
  for (int row = 0; row < 3; ++row) {
    Field da =
        random_curl_field(s.grid(), seed * 0x9E3779B97F4A7C15ull + 102 + row, amplitude);
    for (int j = 0; j < 3; ++j) {
      Real* dst = out.alpha.comp(tensor_comp(row, j));
      const Real* src = da.comp(j);
      for (std::size_t q = 0; q < s.grid().points(); ++q) dst[q] += src[q];
    }
  }
  return out;
}

// Pointwise random dual state of the given magnitude; final-time condition
// enforced. Used as an optimizer start away from D = 0.
inline DualState random_dual_state(const SpaceTimeLattice& lat, std::uint64_t seed,
                                   Real amplitude) {
  DualState d(lat);
  std::mt19937_64 rng(seed * 0xD1342543DE82EF95ull + 7);
  for (int l = 0; l <= lat.nt; ++l) {
    for (Real& v : d.lambda[l].data) v = amplitude * uniform_pm1(rng);
    for (Real& v : d.A[l].data) v = amplitude * uniform_pm1(rng);
    for (Real& v : d.mu[l].data) v = amplitude * uniform_pm1(rng);
  }
  d.enforce_final_time_zero();
  return d;
}

}  // namespace ifdm
