// Differential operators on periodic fields: gradient, divergence, row-wise
// curl, Laplacian, Leray projection, vector potentials, and the inverse
// Laplacian. Two backends:
//
//   spectral - exact for band-limited fields below Nyquist. Derivative of
//              mode k multiplies by i*2*pi*keff, keff zeroing the unsigned
//              Nyquist mode (its odd derivative is ill-defined).
//   fd2      - 2nd-order central differences, periodic wrap.
//
// The optional dealias flag applies the 2/3-rule truncation inside the
// spectral multiplier; callers use it when the operand is a quadratic
// product.
#pragma once

#include <complex>
#include <vector>

#include "ifdm/fft.hpp"
#include "ifdm/grid.hpp"

namespace ifdm {

namespace detail {

inline bool dealias_cut(int n, int j, bool halved_axis) {
  // True wavenumber on this axis (before Nyquist zeroing).
  int k = halved_axis ? j : (j <= n / 2 ? j : j - n);
  return 3 * std::abs(k) > n;
}

// Multiply one transformed component by i*2*pi*k_axis (optionally 2/3
// truncated) and inverse-transform into dst.
inline void spectral_axis_derivative(SpectralWorkspace& ws,
                                     const std::vector<std::complex<Real>>& fhat,
                                     int axis, bool dealias, Real* dst) {
  std::complex<Real>* m = ws.modes();
  const int n = ws.n();
  const int nh = n / 2 + 1;
  ws.for_each_mode([&](std::size_t idx, int k1, int k2, int k3) {
    const int k = axis == 0 ? k1 : (axis == 1 ? k2 : k3);
    std::complex<Real> v = fhat[idx];
    if (dealias) {
      const int j1 = static_cast<int>(idx % nh);
      const int j2 = static_cast<int>((idx / nh) % n);
      const int j3 = static_cast<int>(idx / (static_cast<std::size_t>(nh) * n));
      if (dealias_cut(n, j1, true) || dealias_cut(n, j2, false) ||
          dealias_cut(n, j3, false)) {
        m[idx] = {0.0, 0.0};
        return;
      }
    }
    const Real s = kTwoPi * static_cast<Real>(k);
    m[idx] = {-s * v.imag(), s * v.real()};
  });
  ws.inverse(dst);
}

inline int fd_wrap(int i, int n) { return i >= n ? i - n : (i < 0 ? i + n : i); }

// Central difference along one axis into dst.
inline void fd2_axis_derivative(const PeriodicGrid& g, const Real* src, int axis,
                                Real* dst) {
  const int n = g.n;
  const Real inv2h = 0.5 * static_cast<Real>(n);
  for (int i3 = 0; i3 < n; ++i3)
    for (int i2 = 0; i2 < n; ++i2)
      for (int i1 = 0; i1 < n; ++i1) {
        int p1 = i1, p2 = i2, p3 = i3, m1 = i1, m2 = i2, m3 = i3;
        if (axis == 0) { p1 = fd_wrap(i1 + 1, n); m1 = fd_wrap(i1 - 1, n); }
        else if (axis == 1) { p2 = fd_wrap(i2 + 1, n); m2 = fd_wrap(i2 - 1, n); }
        else { p3 = fd_wrap(i3 + 1, n); m3 = fd_wrap(i3 - 1, n); }
        dst[g.idx(i1, i2, i3)] =
            (src[g.idx(p1, p2, p3)] - src[g.idx(m1, m2, m3)]) * inv2h;
      }
}

// d/dx_axis of one scalar component.
inline void axis_derivative(const PeriodicGrid& g, const Real* src, int axis,
                            Backend backend, bool dealias, Real* dst) {
  if (backend == Backend::fd2) {
    fd2_axis_derivative(g, src, axis, dst);
    return;
  }
  SpectralWorkspace& ws = workspace_for(g.n);
  ws.forward(src);
  std::vector<std::complex<Real>> fhat(ws.complex_size());
  ws.copy_modes_to(fhat.data());
  spectral_axis_derivative(ws, fhat, axis, dealias, dst);
}

}  // namespace detail

// grad f, component i = d_i f.
inline Field grad_scalar(const Field& f, Backend backend = Backend::spectral,
                         bool dealias = false) {
  if (f.comps != 1) throw ArgumentError("grad_scalar: scalar field expected");
  require_finite(f, "grad_scalar");
  Field out = make_vector(f.grid);
  if (backend == Backend::spectral) {
    SpectralWorkspace& ws = workspace_for(f.grid.n);
    ws.forward(f.comp(0));
    std::vector<std::complex<Real>> fhat(ws.complex_size());
    ws.copy_modes_to(fhat.data());
    for (int a = 0; a < 3; ++a)
      detail::spectral_axis_derivative(ws, fhat, a, dealias, out.comp(a));
  } else {
    for (int a = 0; a < 3; ++a)
      detail::fd2_axis_derivative(f.grid, f.comp(0), a, out.comp(a));
  }
  return out;
}

// div v = d_i v_i.
inline Field div_vector(const Field& v, Backend backend = Backend::spectral,
                        bool dealias = false) {
  if (v.comps != 3) throw ArgumentError("div_vector: vector field expected");
  require_finite(v, "div_vector");
  Field out = make_scalar(v.grid);
  std::vector<Real> tmp(v.points());
  for (int a = 0; a < 3; ++a) {
    detail::axis_derivative(v.grid, v.comp(a), a, backend, dealias, tmp.data());
    Real* o = out.comp(0);
    for (std::size_t i = 0; i < v.points(); ++i) o[i] += tmp[i];
  }
  return out;
}

// Row-wise divergence: component i = d_j T_{ij}.
inline Field div_tensor_rowwise(const Field& T, Backend backend = Backend::spectral,
                                bool dealias = false) {
  if (T.comps != 9) throw ArgumentError("div_tensor_rowwise: tensor field expected");
  require_finite(T, "div_tensor_rowwise");
  Field out = make_vector(T.grid);
  std::vector<Real> tmp(T.points());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      detail::axis_derivative(T.grid, T.comp(tensor_comp(i, j)), j, backend,
                              dealias, tmp.data());
      Real* o = out.comp(i);
      for (std::size_t q = 0; q < T.points(); ++q) o[q] += tmp[q];
    }
  return out;
}

// curl of a vector field: component p = e_{pqr} d_q B_r.
inline Field curl_vector(const Field& B, Backend backend = Backend::spectral,
                         bool dealias = false) {
  if (B.comps != 3) throw ArgumentError("curl_vector: vector field expected");
  require_finite(B, "curl_vector");
  Field out = make_vector(B.grid);
  std::vector<Real> tmp(B.points());
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q)
      for (int r = 0; r < 3; ++r) {
        const int e = levi_civita(p, q, r);
        if (e == 0) continue;
        detail::axis_derivative(B.grid, B.comp(r), q, backend, dealias, tmp.data());
        Real* o = out.comp(p);
        for (std::size_t i = 0; i < B.points(); ++i)
          o[i] += static_cast<Real>(e) * tmp[i];
      }
  return out;
}

// Row-wise curl of a tensor field: output_{ip} = e_{pqr} d_q T_{ir}.
inline Field curl_rowwise(const Field& T, Backend backend = Backend::spectral,
                          bool dealias = false) {
  if (T.comps != 9) throw ArgumentError("curl_rowwise: tensor field expected");
  require_finite(T, "curl_rowwise");
  Field out = make_tensor(T.grid);
  std::vector<Real> tmp(T.points());
  for (int i = 0; i < 3; ++i)
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q)
        for (int r = 0; r < 3; ++r) {
          const int e = levi_civita(p, q, r);
          if (e == 0) continue;
          detail::axis_derivative(T.grid, T.comp(tensor_comp(i, r)), q, backend,
                                  dealias, tmp.data());
          Real* o = out.comp(tensor_comp(i, p));
          for (std::size_t s = 0; s < T.points(); ++s)
            o[s] += static_cast<Real>(e) * tmp[s];
        }
  return out;
}

// Componentwise Laplacian.
inline Field laplacian(const Field& f, Backend backend = Backend::spectral) {
  require_finite(f, "laplacian");
  Field out(f.grid, f.comps);
  if (backend == Backend::spectral) {
    SpectralWorkspace& ws = workspace_for(f.grid.n);
    for (int c = 0; c < f.comps; ++c) {
      ws.forward(f.comp(c));
      std::complex<Real>* m = ws.modes();
      ws.for_each_mode([&](std::size_t idx, int k1, int k2, int k3) {
        const Real k2sum = static_cast<Real>(k1) * k1 +
                           static_cast<Real>(k2) * k2 +
                           static_cast<Real>(k3) * k3;
        m[idx] *= -kTwoPi * kTwoPi * k2sum;
      });
      ws.inverse(out.comp(c));
    }
  } else {
    const int n = f.grid.n;
    const Real invh2 = static_cast<Real>(n) * n;
    for (int c = 0; c < f.comps; ++c) {
      const Real* s = f.comp(c);
      Real* o = out.comp(c);
      for (int i3 = 0; i3 < n; ++i3)
        for (int i2 = 0; i2 < n; ++i2)
          for (int i1 = 0; i1 < n; ++i1) {
            const Real c0 = s[f.grid.idx(i1, i2, i3)];
            Real acc = -6.0 * c0;
            acc += s[f.grid.idx(detail::fd_wrap(i1 + 1, n), i2, i3)];
            acc += s[f.grid.idx(detail::fd_wrap(i1 - 1, n), i2, i3)];
            acc += s[f.grid.idx(i1, detail::fd_wrap(i2 + 1, n), i3)];
            acc += s[f.grid.idx(i1, detail::fd_wrap(i2 - 1, n), i3)];
            acc += s[f.grid.idx(i1, i2, detail::fd_wrap(i3 + 1, n))];
            acc += s[f.grid.idx(i1, i2, detail::fd_wrap(i3 - 1, n))];
            o[f.grid.idx(i1, i2, i3)] = acc * invh2;
          }
    }
  }
  return out;
}

// Per-mode Leray projection core on transform coefficients (layout of
// SpectralWorkspace, stride nc between components). The correction is
// iterated to a floating-point fixed point, so this map is exactly
// idempotent at the coefficient level; a full round trip through the
// physical grid re-introduces last-bit transform noise.
inline void leray_project_modes(int n, std::complex<Real>* vhat) {
  SpectralWorkspace& ws = workspace_for(n);
  const std::size_t nc = ws.complex_size();
  ws.for_each_mode([&](std::size_t idx, int k1, int k2, int k3) {
    const Real kk = static_cast<Real>(k1) * k1 + static_cast<Real>(k2) * k2 +
                    static_cast<Real>(k3) * k3;
    if (kk == 0.0) return;
    std::complex<Real>& a = vhat[idx];
    std::complex<Real>& b = vhat[nc + idx];
    std::complex<Real>& c = vhat[2 * nc + idx];
    for (int pass = 0; pass < 4; ++pass) {
      const std::complex<Real> s =
          (static_cast<Real>(k1) * a + static_cast<Real>(k2) * b +
           static_cast<Real>(k3) * c) /
          kk;
      if (s.real() == 0.0 && s.imag() == 0.0) break;
      a -= static_cast<Real>(k1) * s;
      b -= static_cast<Real>(k2) * s;
      c -= static_cast<Real>(k3) * s;
    }
  });
}

// Leray projection onto divergence-free fields. Spectral only; preserves
// the mean.
inline Field leray_project(const Field& v, Backend backend = Backend::spectral) {
  if (backend != Backend::spectral)
    throw UnsupportedBackendError("leray_project: spectral backend only");
  if (v.comps != 3) throw ArgumentError("leray_project: vector field expected");
  require_finite(v, "leray_project");
  SpectralWorkspace& ws = workspace_for(v.grid.n);
  const std::size_t nc = ws.complex_size();
  std::vector<std::complex<Real>> vhat(3 * nc);
  for (int a = 0; a < 3; ++a) {
    ws.forward(v.comp(a));
    ws.copy_modes_to(vhat.data() + a * nc);
  }
  leray_project_modes(v.grid.n, vhat.data());
  Field out = make_vector(v.grid);
  for (int a = 0; a < 3; ++a) {
    ws.load_modes(vhat.data() + a * nc);
    ws.inverse(out.comp(a));
  }
  return out;
}

// 2/3-rule spectral truncation of every component (used by tests and by the
// integrator on quadratic products).
inline Field dealias_truncate(const Field& f) {
  Field out(f.grid, f.comps);
  SpectralWorkspace& ws = workspace_for(f.grid.n);
  const int n = ws.n();
  const int nh = n / 2 + 1;
  for (int c = 0; c < f.comps; ++c) {
    ws.forward(f.comp(c));
    std::complex<Real>* m = ws.modes();
    ws.for_each_mode([&](std::size_t idx, int, int, int) {
      const int j1 = static_cast<int>(idx % nh);
      const int j2 = static_cast<int>((idx / nh) % n);
      const int j3 = static_cast<int>(idx / (static_cast<std::size_t>(nh) * n));
      if (detail::dealias_cut(n, j1, true) || detail::dealias_cut(n, j2, false) ||
          detail::dealias_cut(n, j3, false))
        m[idx] = {0.0, 0.0};
    });
    ws.inverse(out.comp(c));
  }
  return out;
}

// Divergence-free, zero-mean vector potential of each row: curl chi_row =
// alpha_row. Requires mean-free rows (the curl of anything integrates to
// zero over the torus). Spectral only.
inline Field vector_potential_rowwise(const Field& alpha) {
  if (alpha.comps != 9)
    throw ArgumentError("vector_potential_rowwise: tensor field expected");
  require_finite(alpha, "vector_potential_rowwise");
  SpectralWorkspace& ws = workspace_for(alpha.grid.n);
  const std::size_t nc = ws.complex_size();
  Field chi = make_tensor(alpha.grid);
  std::vector<std::complex<Real>> ahat(3 * nc);
  for (int row = 0; row < 3; ++row) {
    for (int a = 0; a < 3; ++a) {
      ws.forward(alpha.comp(tensor_comp(row, a)));
      ws.copy_modes_to(ahat.data() + a * nc);
    }
    for (int a = 0; a < 3; ++a) {
      std::complex<Real>* m = ws.modes();
      ws.for_each_mode([&](std::size_t idx, int k1, int k2, int k3) {
        const Real kk = static_cast<Real>(k1) * k1 + static_cast<Real>(k2) * k2 +
                        static_cast<Real>(k3) * k3;
        if (kk == 0.0) {
          m[idx] = {0.0, 0.0};
          return;
        }
        const int kv[3] = {k1, k2, k3};
        // chi_hat = i (k x alpha_hat) / (2 pi |k|^2)
        std::complex<Real> cross{0.0, 0.0};
        for (int q = 0; q < 3; ++q)
          for (int r = 0; r < 3; ++r) {
            const int e = levi_civita(a, q, r);
            if (e == 0) continue;
            cross += static_cast<Real>(e * kv[q]) * ahat[r * nc + idx];
          }
        const std::complex<Real> i_unit{0.0, 1.0};
        m[idx] = i_unit * cross / (kTwoPi * kk);
      });
      ws.inverse(chi.comp(tensor_comp(row, a)));
    }
  }
  return chi;
}

// Solve -Laplace(p) = f with zero mean (pressure gauge on the torus).
inline Field solve_neg_laplacian(const Field& f) {
  if (f.comps != 1) throw ArgumentError("solve_neg_laplacian: scalar expected");
  require_finite(f, "solve_neg_laplacian");
  SpectralWorkspace& ws = workspace_for(f.grid.n);
  ws.forward(f.comp(0));
  std::complex<Real>* m = ws.modes();
  ws.for_each_mode([&](std::size_t idx, int k1, int k2, int k3) {
    const Real kk = static_cast<Real>(k1) * k1 + static_cast<Real>(k2) * k2 +
                    static_cast<Real>(k3) * k3;
    if (kk == 0.0) {
      m[idx] = {0.0, 0.0};
      return;
    }
    m[idx] /= kTwoPi * kTwoPi * kk;
  });
  Field out = make_scalar(f.grid);
  ws.inverse(out.comp(0));
  return out;
}

}  // namespace ifdm
